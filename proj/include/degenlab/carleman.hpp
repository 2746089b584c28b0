#pragma once

#include <memory>
#include <string>
#include <vector>

#include "degenlab/cgo.hpp"

namespace degenlab {

// Smooth test field  v(x) = chi(x) (P(x') + t^{2s} Q(x')),  t = x_d.
// P and Q are random trigonometric polynomials in the horizontal variables.
// chi is a product of horizontal cutoffs vanishing to second order at the
// side faces and a vertical cutoff equal to 1 for t <= flat * height and
// vanishing to second order at the top face, so v and w d_nu v vanish on
// the boundary away from Sigma1.
class CutoffTestField {
public:
    CutoffTestField(const Mesh& mesh, double s, unsigned seed, int modes = 3, double flat = 1.0 / 3.0);

    double s() const { return s_; }
    double value(const Point& x) const;
    std::array<double, 3> grad(const Point& x) const;
    // div(w grad v) / w, evaluated in closed form.
    double div_w_grad_over_w(const Point& x) const;
    // lim_{t -> 0} w d_t v (inward weighted co-normal derivative) at (x', 0).
    double conormal(const Point& x) const;

private:
    struct Mode {
        double amp, phase;
        std::array<double, 3> kappa;
    };
    struct Jet {
        double v = 0.0;
        std::array<double, 3> g{};  // horizontal gradient
        double lap = 0.0;           // horizontal Laplacian
    };
    Jet poly(const std::vector<Mode>& m, const Point& x) const;
    Jet hcut(const Point& x) const;
    void vcut(double t, double& c, double& ct, double& ctt) const;

    double s_;
    int dim_;
    Point lo_{0, 0, 0}, hi_{0, 0, 0};
    double flat_;
    std::vector<Mode> P_, Q_;
};

struct CarlemanResult {
    double lhs = 0.0, rhs = 0.0, ratio = 0.0;
    bool zero = false;  // 0/0 sentinel
    // pieces
    double traceTerm = 0.0, l2Term = 0.0, gradTerm = 0.0;
    double bulkTerm = 0.0, boundaryTerm = 0.0;
};

// Both sides of the weighted Carleman estimate for u = e^{-xi.x} v.  The bulk
// datum e^{xi.x} f, f = div(w grad u) + w V u, is measured in the dual of the
// semiclassical space (norm |xi|^2 ||.||^2_{L^2(w)} + ||grad .||^2_{L^2(w)}),
// computed through its Riesz representative z on the mesh:
//   int w (z v + |xi|^{-2} grad z . grad v) = <e^{xi.x} f, v>,
//   bulk term = ||z||_{L^2(w)} + |xi|^{-1} ||grad z||_{L^2(w)}.
// The boundary datum is g = lim w d_t u + q u on Sigma1.
CarlemanResult carleman_ratio(const CutoffTestField& v, const CGOParams& p, const RealField& V, const RealField& q,
                              std::shared_ptr<const Mesh> mesh);
// Same with the zero field; returns the 0/0 sentinel.
CarlemanResult carleman_ratio_zero();

// Checks that v and its gradient vanish on the boundary away from Sigma1;
// throws CutoffViolation otherwise.
void check_cutoff(const CutoffTestField& v, const Mesh& mesh, double tol = 1e-12);

struct CarlemanSweep {
    double s = 0.5;
    std::vector<double> taus;
    std::vector<std::vector<double>> ratios;  // [field][tau]
    std::vector<double> slopes;               // per field, full-range log-log slope
    double maxSlope = 0.0;
    bool skipped = false;
    std::string warning;
};

// Sweep over tau for several seeded test fields.  At s = 1/2 the estimate
// needs a small boundary potential; when max |q| exceeds qSmall the sweep is
// skipped with a warning.
CarlemanSweep carleman_sweep(double s, const std::vector<double>& taus, const std::vector<unsigned>& seeds,
                             const RealField& V, const RealField& q, std::shared_ptr<const Mesh> mesh,
                             double qSmall = 1.0, int threads = 1);

enum class TraceMode { Unweighted, Weighted };
const char* to_string(TraceMode m);
TraceMode trace_mode_from_string(const std::string& name);

// ||u||_{L^2(boundary)} / (mu^{-1} ||grad u|| + mu ||u||) for Unweighted (s
// ignored) and ||u||_{L^2(boundary)} / (mu^{-s} ||d^{(1-2s)/2} grad u||
// + mu^{1-s} ||d^{(1-2s)/2} u||) for Weighted, d the distance to the boundary.  Throws InvalidArgument if mu < mu0.
double trace_inequality_ratio(const Mesh& mesh, const VectorXc& u, double mu, double s, TraceMode mode,
                              double mu0 = 1.0);

}  // namespace degenlab
