#include "yosida/error.hpp"
#include "yosida/graphs.hpp"

#include <cctype>
#include <cstdlib>

namespace yosida {

namespace {

struct Value {
    bool is_list = false;
    double num = 0.0;
    std::vector<Value> items;
};

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    ScalarGraph parse() {
        skip();
        size_t name_pos = i_;
        std::string name;
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) name += s_[i_++];
        if (name.empty()) fail("expected a graph builder name");
        skip();
        expect('(');
        std::vector<Value> args;
        skip();
        if (peek() != ')') {
            args.push_back(value());
            skip();
            while (peek() == ',') {
                ++i_;
                args.push_back(value());
                skip();
            }
        }
        expect(')');
        skip();
        if (i_ != s_.size()) fail("unexpected trailing characters");
        return build(name, args, name_pos);
    }

private:
    char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    [[noreturn]] void fail(const std::string& msg, size_t at = std::string::npos) const {
        if (at == std::string::npos) at = i_;
        int line = 1, col = 1;
        for (size_t k = 0; k < at && k < s_.size(); ++k) {
            if (s_[k] == '\n') { ++line; col = 1; } else { ++col; }
        }
        throw InvalidArgument("graph spec line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
    }

    void expect(char c) {
        skip();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++i_;
    }

    Value value() {
        skip();
        Value v;
        if (peek() == '[') {
            ++i_;
            v.is_list = true;
            skip();
            if (peek() != ']') {
                v.items.push_back(value());
                skip();
                while (peek() == ',') {
                    ++i_;
                    v.items.push_back(value());
                    skip();
                }
            }
            expect(']');
            return v;
        }
        const char* begin = s_.c_str() + i_;
        char* end = nullptr;
        v.num = std::strtod(begin, &end);
        if (end == begin) fail("expected a number or list");
        i_ += static_cast<size_t>(end - begin);
        return v;
    }

    double num(const std::vector<Value>& args, size_t k, size_t at) const {
        if (k >= args.size() || args[k].is_list) fail("argument " + std::to_string(k + 1) + " must be a number", at);
        return args[k].num;
    }

    ScalarGraph build(const std::string& name, const std::vector<Value>& args, size_t at) const {
        auto arity = [&](size_t lo, size_t hi) {
            if (args.size() < lo || args.size() > hi)
                fail(name + " takes " + std::to_string(lo) + (lo == hi ? "" : "-" + std::to_string(hi)) + " arguments", at);
        };
        try {
            if (name == "sign") {
                arity(0, 1);
                return graphs::sign(args.empty() ? 1.0 : num(args, 0, at));
            }
            if (name == "power") {
                arity(1, 2);
                return graphs::power(num(args, 0, at), args.size() > 1 ? num(args, 1, at) : 0.0);
            }
            if (name == "p_laplace") {
                arity(1, 1);
                return graphs::power(num(args, 0, at), 0.0);
            }
            if (name == "btw" || name == "zhang") {
                arity(0, 1);
                return graphs::btw(args.empty() ? 0.0 : num(args, 0, at));
            }
            if (name == "linear") {
                arity(0, 1);
                return graphs::linear(args.empty() ? 1.0 : num(args, 0, at));
            }
            if (name == "non_newtonian") {
                arity(1, 1);
                return graphs::non_newtonian(num(args, 0, at));
            }
            if (name == "piecewise") {
                arity(2, 2);
                if (!args[0].is_list || !args[1].is_list) fail("piecewise takes two lists", at);
                std::vector<double> bps;
                for (const auto& v : args[0].items) {
                    if (v.is_list) fail("breakpoints must be numbers", at);
                    bps.push_back(v.num);
                }
                std::vector<std::pair<double, double>> br;
                for (const auto& v : args[1].items) {
                    if (!v.is_list || v.items.size() != 2 || v.items[0].is_list || v.items[1].is_list)
                        fail("each branch must be [slope, intercept]", at);
                    br.emplace_back(v.items[0].num, v.items[1].num);
                }
                return graphs::piecewise(bps, br);
            }
        } catch (const InvalidArgument& e) {
            std::string msg = e.what();
            if (msg.rfind("graph spec", 0) == 0) throw;
            fail(msg, at);
        }
        fail("unknown graph builder '" + name + "'", at);
    }

    const std::string& s_;
    size_t i_ = 0;
};

}  // namespace

ScalarGraph parse_graph(const std::string& text) { return Parser(text).parse(); }

}  // namespace yosida
