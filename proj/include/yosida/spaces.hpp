#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <string>

namespace yosida {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Uniform grid of interior nodes on (0,1)^d, zero Dirichlet boundary.
struct Grid {
    int d = 1;
    int n = 2;

    Grid() = default;
    Grid(int dim, int nodes);

    double h() const { return 1.0 / (n + 1); }
    double w() const;           // quadrature weight h^d
    int size() const;           // n^d
    int edges() const;          // forward-difference edges incl. boundary edges
    // node coordinate of index i along axis a
    double coord(int i, int axis) const;

    bool operator==(const Grid& o) const { return d == o.d && n == o.n; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

struct Field {
    Grid grid;
    Vec values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(Vec::Zero(g.size())) {}
    Field(const Grid& g, Vec v);

    int size() const { return static_cast<int>(values.size()); }
    bool finite() const { return values.allFinite(); }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double a) { values *= a; return *this; }
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field b);

/// Sampled first sine mode prod_a sin(pi xi_a).
Field sine_mode(const Grid& g);

// Stencil-level helpers on raw vectors.
Vec laplacian(const Grid& g, const Vec& u);
Vec gradient(const Grid& g, const Vec& u);            // D u on edges
Vec gradient_transpose(const Grid& g, const Vec& e);  // D^T e on nodes (= -div_h)
Vec central_gradient(const Grid& g, const Vec& u, int axis);
SpMat stiffness(const Grid& g);                       // K = D^T D = -Delta_h

/// Smallest eigenvalue of K in closed form.
double first_eigenvalue(const Grid& g);

Field laplacian(const Field& u);

/// Cached solver for K u = f; shared read-only between threads.
class PoissonSolver {
public:
    static std::shared_ptr<const PoissonSolver> get(const Grid& g);
    explicit PoissonSolver(const Grid& g);

    Vec solve(const Vec& f) const;
    const Grid& grid() const { return grid_; }
    const SpMat& matrix() const { return K_; }

private:
    struct Impl;
    Grid grid_;
    SpMat K_;
    std::shared_ptr<Impl> impl_;
};

/// Returns u with -Delta_h u = f.
Field inv_laplacian(const Field& f);

enum class NormSpace { Lp, L2, Hminus1, W1p };

double lp_norm(const Grid& g, const Vec& u, double p);
double w1p_norm(const Grid& g, const Vec& u, double p);
double hminus1_norm(const Grid& g, const Vec& u);
double norm(const Field& u, NormSpace space, double p = 2.0);

/// Storage of a dual element: a node density paired against u, or an
/// edge density paired against D u.
enum class DualRep { NodeDensity, EdgeDensity };

struct DualField {
    Grid grid;
    DualRep rep = DualRep::NodeDensity;
    Vec values;

    DualField() = default;
    DualField(const Grid& g, DualRep r);
    DualField(const Grid& g, DualRep r, Vec v);

    DualField& operator+=(const DualField& o);
    DualField& operator-=(const DualField& o);
    DualField& operator*=(double a) { values *= a; return *this; }
};

DualField operator+(DualField a, const DualField& b);
DualField operator-(DualField a, const DualField& b);
DualField operator*(double a, DualField b);

/// Node representation of a dual element: D^T v for edge densities.
Vec node_functional(const DualField& v);

struct GelfandTriple {
    enum class Kind { PorousMedia, PhiLaplace };
    Kind kind = Kind::PorousMedia;
    double p = 2.0;
    double alpha = 2.0;

    static GelfandTriple porous_media(double p, double alpha = 0.0);
    static GelfandTriple phi_laplace(double p, double alpha = 0.0);

    double conjugate() const { return p / (p - 1.0); }
    double norm_V(const Field& u) const;
    double norm_H(const Field& u) const;
    double norm_V(const Grid& g, const Vec& u) const;
    double norm_H(const Grid& g, const Vec& u) const;
    std::string name() const;
};

void validate(const GelfandTriple& t, int d);

double pairing(const DualField& v, const Field& u);
double pairing(const DualField& v, const Field& u, const GelfandTriple& t);

/// L^{p'} quadrature norm of the stored density.
double density_norm(const DualField& v, double p);

struct DualNorm {
    double lower = 0.0;
    double upper = 0.0;
    bool exact = false;
    double value() const { return exact ? upper : 0.5 * (lower + upper); }
};

/// V*-norm of v in the given triple. Exact for the porous-media triple and
/// for p = 2; otherwise a bracket [dictionary sup, density norm].
DualNorm dual_norm(const DualField& v, const GelfandTriple& t);

struct EmbeddingResult {
    double c0 = 0.0;
    bool converged = false;
    int restarts = 0;
    double eigen_check = -1.0;  // sqrt(mu_1) when p = 2, else -1
    Vec minimizer;
};

struct EmbeddingOptions {
    int restarts = 8;
    int max_iter = 2000;
    double tol = 1e-11;
    unsigned long long seed = 12345;
};

/// Discrete c0 with ||u||_V >= c0 ||u||_H on this grid.
EmbeddingResult embedding_constant(const GelfandTriple& t, const Grid& g,
                                   const EmbeddingOptions& opts = {});

}  // namespace yosida
