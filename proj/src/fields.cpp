#include "torusflow/fields.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace torusflow {

namespace {

using cplx = std::complex<double>;

int box_side(int kmax) { return 2 * kmax + 1; }

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

// --- FourierTable -----------------------------------------------------------

FourierTable::FourierTable(int dim, int kmax, int components)
    : dim_(dim), kmax_(kmax), components_(components) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("FourierTable: bad dim");
  if (kmax < 0) throw ConfigError("FourierTable: negative kmax");
  modes_ = static_cast<int>(ipow(static_cast<std::size_t>(box_side(kmax)), dim));
  c_.assign(static_cast<std::size_t>(modes_) * components, cplx(0, 0));
}

std::size_t FourierTable::flat_index(const std::array<int, kMaxDim>& k) const {
  std::size_t idx = 0;
  int side = box_side(kmax_);
  for (int a = 0; a < dim_; ++a) {
    int o = k[a] + kmax_;
    if (o < 0 || o >= side) throw ConfigError("FourierTable: mode out of box");
    idx = idx * side + static_cast<std::size_t>(o);
  }
  return idx;
}

std::array<int, kMaxDim> FourierTable::mode_of(std::size_t flat) const {
  std::array<int, kMaxDim> k{};
  int side = box_side(kmax_);
  for (int a = dim_ - 1; a >= 0; --a) {
    k[a] = static_cast<int>(flat % side) - kmax_;
    flat /= side;
  }
  return k;
}

std::complex<double>& FourierTable::at(int comp,
                                       const std::array<int, kMaxDim>& k) {
  return c_[static_cast<std::size_t>(comp) * modes_ + flat_index(k)];
}

const std::complex<double>& FourierTable::at(
    int comp, const std::array<int, kMaxDim>& k) const {
  return c_[static_cast<std::size_t>(comp) * modes_ + flat_index(k)];
}

bool FourierTable::conjugate_symmetric(double tol) const {
  for (int comp = 0; comp < components_; ++comp) {
    for (std::size_t f = 0; f < static_cast<std::size_t>(modes_); ++f) {
      auto k = mode_of(f);
      std::array<int, kMaxDim> mk{};
      for (int a = 0; a < dim_; ++a) mk[a] = -k[a];
      cplx a = c_[static_cast<std::size_t>(comp) * modes_ + f];
      cplx b = at(comp, mk);
      if (std::abs(a - std::conj(b)) > tol) return false;
    }
  }
  return true;
}

namespace {

// Per-axis phase lookup e^{2 pi i k x_a}, k = -kmax..kmax.
void axis_phases(double x, int kmax, std::vector<cplx>& out) {
  int side = box_side(kmax);
  out.resize(side);
  cplx w = std::polar(1.0, two_pi * (x - std::floor(x)));
  cplx cur(1.0, 0.0);
  out[kmax] = cur;
  for (int k = 1; k <= kmax; ++k) {
    cur *= w;
    out[kmax + k] = cur;
    out[kmax - k] = std::conj(cur);
  }
}

}  // namespace

double FourierTable::eval(int comp, const Vec& x) const {
  std::vector<cplx> ph[kMaxDim];
  for (int a = 0; a < dim_; ++a) axis_phases(x[a], kmax_, ph[a]);
  int side = box_side(kmax_);
  const cplx* base = c_.data() + static_cast<std::size_t>(comp) * modes_;
  cplx acc(0, 0);
  std::array<int, kMaxDim> off{};  // offsets 0..side-1 per axis
  for (int f = 0; f < modes_; ++f) {
    cplx p = ph[0][off[0]];
    for (int a = 1; a < dim_; ++a) p *= ph[a][off[a]];
    acc += base[f] * p;
    for (int a = dim_ - 1; a >= 0; --a) {
      if (++off[a] < side) break;
      off[a] = 0;
    }
  }
  return acc.real();
}

double FourierTable::eval_derivative(int comp, int axis, const Vec& x) const {
  std::vector<cplx> ph[kMaxDim];
  for (int a = 0; a < dim_; ++a) axis_phases(x[a], kmax_, ph[a]);
  int side = box_side(kmax_);
  const cplx* base = c_.data() + static_cast<std::size_t>(comp) * modes_;
  cplx acc(0, 0);
  std::array<int, kMaxDim> off{};
  for (int f = 0; f < modes_; ++f) {
    cplx p = ph[0][off[0]];
    for (int a = 1; a < dim_; ++a) p *= ph[a][off[a]];
    double kax = off[axis] - kmax_;
    acc += base[f] * p * cplx(0.0, two_pi * kax);
    for (int a = dim_ - 1; a >= 0; --a) {
      if (++off[a] < side) break;
      off[a] = 0;
    }
  }
  return acc.real();
}

namespace {

// Contracts one tensor axis against a dense matrix T (rows x cols), replacing
// axis size cols by rows. Tensor is row-major over `sizes`.
std::vector<cplx> contract_axis(const std::vector<cplx>& in,
                                std::vector<int>& sizes, int axis,
                                const std::vector<cplx>& T, int rows) {
  int cols = sizes[axis];
  std::size_t outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= sizes[a];
  for (std::size_t a = axis + 1; a < sizes.size(); ++a) inner *= sizes[a];
  std::vector<cplx> out(outer * rows * inner, cplx(0, 0));
  for (std::size_t o = 0; o < outer; ++o) {
    const cplx* inb = in.data() + o * cols * inner;
    cplx* outb = out.data() + o * rows * inner;
    for (int g = 0; g < rows; ++g) {
      const cplx* trow = T.data() + static_cast<std::size_t>(g) * cols;
      cplx* orow = outb + static_cast<std::size_t>(g) * inner;
      for (int k = 0; k < cols; ++k) {
        cplx t = trow[k];
        if (t == cplx(0, 0)) continue;
        const cplx* irow = inb + static_cast<std::size_t>(k) * inner;
        for (std::size_t i = 0; i < inner; ++i) orow[i] += t * irow[i];
      }
    }
  }
  sizes[axis] = rows;
  return out;
}

}  // namespace

std::vector<double> FourierTable::sample_grid(int comp, int m) const {
  int side = box_side(kmax_);
  std::vector<cplx> tensor(c_.begin() + static_cast<std::size_t>(comp) * modes_,
                           c_.begin() + static_cast<std::size_t>(comp + 1) * modes_);
  std::vector<int> sizes(dim_, side);
  // Synthesis matrix per axis: P[g][k] = e^{2 pi i k (g+0.5)/m}.
  std::vector<cplx> P(static_cast<std::size_t>(m) * side);
  for (int g = 0; g < m; ++g)
    for (int k = -kmax_; k <= kmax_; ++k)
      P[static_cast<std::size_t>(g) * side + (k + kmax_)] =
          std::polar(1.0, two_pi * k * (g + 0.5) / m);
  for (int a = 0; a < dim_; ++a) tensor = contract_axis(tensor, sizes, a, P, m);
  std::vector<double> out(tensor.size());
  for (std::size_t i = 0; i < tensor.size(); ++i) out[i] = tensor[i].real();
  return out;
}

double FourierTable::max_abs_coefficient() const {
  double m = 0;
  for (const auto& z : c_) m = std::max(m, std::abs(z));
  return m;
}

// --- Closed-form kinds ------------------------------------------------------

namespace {

double stepanoff_s(const Vec& x) {
  double s = 0;
  for (int i = 0; i < x.size(); ++i) {
    double si = std::sin(M_PI * x[i]);
    s += si * si;
  }
  return s;
}

double stepanoff_rho_val(const Vec& x, double beta0) {
  double s = stepanoff_s(x);
  return s > 0 ? std::pow(s, beta0) : 0.0;
}

Vec stepanoff_rho_grad(const Vec& x, double beta0) {
  Vec g = Vec::Zero(x.size());
  double s = stepanoff_s(x);
  if (s <= 0) return g;  // limit is 0 for beta0 > 1/2
  double f = beta0 * std::pow(s, beta0 - 1.0) * M_PI;
  for (int i = 0; i < x.size(); ++i) g[i] = f * std::sin(two_pi * x[i]);
  return g;
}

// u = xi.x + (amp/2pi)(sin 2pi x1 + sin 2pi x2); returns grad u.
Vec rrg_grad_u(const RhoRotGradField& p, const Vec& x) {
  Vec g(2);
  g[0] = p.xi[0] + p.amp * std::cos(two_pi * x[0]);
  g[1] = p.xi[1] + p.amp * std::cos(two_pi * x[1]);
  return g;
}

struct EvalVisitor {
  const FieldSpec& spec;
  const Vec& x;

  Vec operator()(const ConstantField& p) const { return p.xi; }
  Vec operator()(const StepanoffField& p) const {
    return stepanoff_rho_val(x, p.beta0) * p.xi;
  }
  Vec operator()(const ShearField& p) const {
    Vec b = Vec::Zero(spec.dim);
    b[0] = p.offset + p.amp * std::sin(two_pi * x[1]);
    return b;
  }
  Vec operator()(const GradientField& p) const {
    Vec b = Vec::Zero(spec.dim);
    b[0] = -p.amp * std::sin(two_pi * x[0]);
    return b;
  }
  Vec operator()(const RhoRotGradField& p) const {
    Vec gu = rrg_grad_u(p, x);
    Vec w(2);
    w[0] = -gu[1];
    w[1] = gu[0];
    double rho = p.unit_rho ? 1.0 : stepanoff_rho_val(x, p.beta0);
    return rho * w;
  }
  Vec operator()(const FourierField& p) const {
    Vec b(spec.dim);
    for (int i = 0; i < spec.dim; ++i) b[i] = p.table->eval(i, x);
    return b;
  }
  Vec operator()(const CustomField& p) const { return p.value(x); }
};

struct JacVisitor {
  const FieldSpec& spec;
  const Vec& x;

  Mat operator()(const ConstantField&) const {
    return Mat::Zero(spec.dim, spec.dim);
  }
  Mat operator()(const StepanoffField& p) const {
    Vec g = stepanoff_rho_grad(x, p.beta0);
    return p.xi * g.transpose();
  }
  Mat operator()(const ShearField& p) const {
    Mat j = Mat::Zero(spec.dim, spec.dim);
    j(0, 1) = two_pi * p.amp * std::cos(two_pi * x[1]);
    return j;
  }
  Mat operator()(const GradientField& p) const {
    Mat j = Mat::Zero(spec.dim, spec.dim);
    j(0, 0) = -two_pi * p.amp * std::cos(two_pi * x[0]);
    return j;
  }
  Mat operator()(const RhoRotGradField& p) const {
    // b = rho0 * w, w = (-d2u, d1u).
    Vec gu = rrg_grad_u(p, x);
    Vec w(2);
    w[0] = -gu[1];
    w[1] = gu[0];
    double u11 = -two_pi * p.amp * std::sin(two_pi * x[0]);
    double u22 = -two_pi * p.amp * std::sin(two_pi * x[1]);
    Mat dw(2, 2);
    dw(0, 0) = 0.0;
    dw(0, 1) = -u22;
    dw(1, 0) = u11;
    dw(1, 1) = 0.0;
    if (p.unit_rho) return dw;
    double rho = stepanoff_rho_val(x, p.beta0);
    Vec gr = stepanoff_rho_grad(x, p.beta0);
    return rho * dw + w * gr.transpose();
  }
  Mat operator()(const FourierField& p) const {
    Mat j(spec.dim, spec.dim);
    for (int i = 0; i < spec.dim; ++i)
      for (int a = 0; a < spec.dim; ++a)
        j(i, a) = p.table->eval_derivative(i, a, x);
    return j;
  }
  Mat operator()(const CustomField& p) const { return p.jacobian(x); }
};

}  // namespace

Vec eval_field(const FieldSpec& spec, const Vec& x) {
  return std::visit(EvalVisitor{spec, x}, spec.params);
}

Mat eval_jacobian_matrix(const FieldSpec& spec, const Vec& x) {
  return std::visit(JacVisitor{spec, x}, spec.params);
}

double eval_divergence(const FieldSpec& spec, const Vec& x) {
  // Shortcuts for the cases where the trace is structurally simple.
  if (std::holds_alternative<ConstantField>(spec.params) ||
      std::holds_alternative<ShearField>(spec.params))
    return 0.0;
  if (const auto* p = std::get_if<StepanoffField>(&spec.params))
    return p->xi.dot(stepanoff_rho_grad(x, p->beta0));
  if (const auto* p = std::get_if<RhoRotGradField>(&spec.params)) {
    if (p->unit_rho) return 0.0;
    Vec gu = rrg_grad_u(*p, x);
    Vec w(2);
    w[0] = -gu[1];
    w[1] = gu[0];
    return w.dot(stepanoff_rho_grad(x, p->beta0));
  }
  return eval_jacobian_matrix(spec, x).trace();
}

double sup_norm_estimate(const FieldSpec& spec, int samples_per_axis) {
  int n = samples_per_axis;
  // Keep the total sample budget roughly dimension independent.
  if (spec.dim == 3) n = std::max(12, samples_per_axis / 4);
  if (spec.dim == 4) n = std::max(8, samples_per_axis / 8);
  double m = 0;
  for (const Vec& x : midpoint_grid(n, spec.dim))
    m = std::max(m, eval_field(spec, x).norm());
  return m;
}

bool coordinates_incommensurable(const Vec& xi, int bound, double tol) {
  int d = static_cast<int>(xi.size());
  if (d == 4) bound = std::min(bound, 24);
  double scale = xi.cwiseAbs().maxCoeff();
  if (scale == 0) return false;
  std::vector<int> k(d, -bound);
  for (;;) {
    double dot = 0, l1 = 0;
    bool zero = true;
    for (int a = 0; a < d; ++a) {
      dot += k[a] * xi[a];
      l1 += std::abs(k[a]);
      if (k[a] != 0) zero = false;
    }
    if (!zero && std::abs(dot) <= tol * l1 * scale) return false;
    int a = d - 1;
    for (; a >= 0; --a) {
      if (++k[a] <= bound) break;
      k[a] = -bound;
    }
    if (a < 0) break;
  }
  return true;
}

ScalarField stepanoff_rho(int dim, double beta0) {
  ScalarField f;
  f.dim = dim;
  f.value = [beta0](const Vec& x) { return stepanoff_rho_val(x, beta0); };
  f.gradient = [beta0](const Vec& x) { return stepanoff_rho_grad(x, beta0); };
  return f;
}

// --- Factories --------------------------------------------------------------

namespace {
void check_dim(int d) {
  if (d < kMinDim || d > kMaxDim)
    throw ConfigError("field dimension must be in [2,4]");
}
}  // namespace

FieldSpec make_constant(const Vec& xi) {
  check_dim(static_cast<int>(xi.size()));
  FieldSpec s;
  s.dim = static_cast<int>(xi.size());
  s.params = ConstantField{xi};
  s.name = "constant";
  return s;
}

FieldSpec make_stepanoff(int dim, double beta0, const Vec& xi) {
  check_dim(dim);
  if (xi.size() != dim) throw ConfigError("stepanoff: xi dimension mismatch");
  if (!(beta0 > 0.5 && beta0 < 1.0))
    throw ConfigError("stepanoff: beta0 must lie in (1/2, 1)");
  if (!coordinates_incommensurable(xi))
    throw ConfigError("stepanoff: xi coordinates have an integer relation");
  FieldSpec s;
  s.dim = dim;
  s.params = StepanoffField{beta0, xi};
  s.name = "stepanoff";
  s.stationary_points.push_back(Vec::Zero(dim));
  s.density_singular_points.push_back(Vec::Zero(dim));
  return s;
}

FieldSpec make_shear(int dim, double offset, double amp) {
  check_dim(dim);
  FieldSpec s;
  s.dim = dim;
  s.params = ShearField{offset, amp};
  s.name = "shear";
  return s;
}

FieldSpec make_gradient(int dim, double amp) {
  check_dim(dim);
  if (amp == 0) throw ConfigError("gradient: amp must be nonzero");
  FieldSpec s;
  s.dim = dim;
  s.params = GradientField{amp};
  s.name = "gradient";
  // b_1 = -amp sin(2 pi x_1) vanishes on the planes x_1 in {0, 1/2}; the
  // declared representatives are the two points with remaining coords 0.
  Vec z = Vec::Zero(dim);
  s.stationary_points.push_back(z);
  z[0] = 0.5;
  s.stationary_points.push_back(z);
  return s;
}

FieldSpec make_rho_rot_grad(const Vec& xi, double amp, bool unit_rho,
                            double beta0) {
  if (xi.size() != 2) throw ConfigError("rho-rot-grad: only d = 2 supported");
  if (!coordinates_incommensurable(xi))
    throw ConfigError("rho-rot-grad: xi coordinates have an integer relation");
  if (std::abs(amp) >= std::min(std::abs(xi[0]), std::abs(xi[1])))
    throw ConfigError("rho-rot-grad: |amp| must keep grad(u) nonvanishing");
  if (!unit_rho && !(beta0 > 0.5 && beta0 < 1.0))
    throw ConfigError("rho-rot-grad: beta0 must lie in (1/2, 1)");
  FieldSpec s;
  s.dim = 2;
  s.params = RhoRotGradField{xi, amp, unit_rho, beta0};
  s.name = unit_rho ? "rot-grad" : "rho-rot-grad";
  if (!unit_rho) {
    s.stationary_points.push_back(Vec::Zero(2));
    s.density_singular_points.push_back(Vec::Zero(2));
  }
  return s;
}

FieldSpec make_fourier(int dim, std::shared_ptr<const FourierTable> table,
                       std::string name) {
  check_dim(dim);
  if (!table || table->dim() != dim || table->components() != dim)
    throw ConfigError("fourier: table shape mismatch");
  if (!table->conjugate_symmetric())
    throw ConfigError("fourier: coefficients are not conjugate-symmetric");
  FieldSpec s;
  s.dim = dim;
  s.params = FourierField{std::move(table)};
  s.name = std::move(name);
  return s;
}

bool FieldSpec::divergence_free_by_construction() const {
  if (std::holds_alternative<ConstantField>(params)) return true;
  if (std::holds_alternative<ShearField>(params)) return true;
  if (const auto* p = std::get_if<RhoRotGradField>(&params)) return p->unit_rho;
  if (const auto* p = std::get_if<FourierField>(&params)) {
    // div b has coefficients 2 pi i k . c(k); band-limited, so this is exact.
    const FourierTable& t = *p->table;
    double scale = std::max(t.max_abs_coefficient(), 1e-300);
    for (std::size_t f = 0; f < static_cast<std::size_t>(t.modes_per_component());
         ++f) {
      auto k = t.mode_of(f);
      std::complex<double> acc(0, 0);
      for (int c = 0; c < dim; ++c) acc += double(k[c]) * t.at(c, k);
      if (std::abs(acc) > 1e-12 * scale) return false;
    }
    return true;
  }
  return false;
}

// --- Discrete Fourier projection --------------------------------------------

namespace {

FourierTable transform_samples(const std::vector<std::vector<cplx>>& samples,
                               int dim, int kmax, int n, int components) {
  FourierTable table(dim, kmax, components);
  int side = box_side(kmax);
  // Analysis matrix per axis: E[k][g] = e^{-2 pi i k g / n} / n.
  std::vector<cplx> E(static_cast<std::size_t>(side) * n);
  for (int k = -kmax; k <= kmax; ++k)
    for (int g = 0; g < n; ++g)
      E[static_cast<std::size_t>(k + kmax) * n + g] =
          std::polar(1.0 / n, -two_pi * k * g / n);
  for (int comp = 0; comp < components; ++comp) {
    std::vector<cplx> tensor = samples[comp];
    std::vector<int> sizes(dim, n);
    for (int a = 0; a < dim; ++a)
      tensor = contract_axis(tensor, sizes, a, E, side);
    std::copy(tensor.begin(), tensor.end(),
              table.raw().begin() + static_cast<std::size_t>(comp) *
                                        table.modes_per_component());
  }
  return table;
}

std::vector<Vec> corner_grid(int n, int dim) {
  std::vector<Vec> pts;
  std::size_t total = ipow(n, dim);
  pts.reserve(total);
  std::vector<int> idx(dim, 0);
  for (std::size_t c = 0; c < total; ++c) {
    Vec p(dim);
    for (int j = 0; j < dim; ++j) p[j] = double(idx[j]) / n;
    pts.push_back(p);
    for (int j = dim - 1; j >= 0; --j) {
      if (++idx[j] < n) break;
      idx[j] = 0;
    }
  }
  return pts;
}

}  // namespace

FourierTable fourier_from_field(const FieldSpec& spec, int kmax,
                                int grid_per_axis) {
  int n = grid_per_axis;
  if (n <= 2 * kmax) throw ConfigError("fourier_from_field: grid too coarse");
  auto pts = corner_grid(n, spec.dim);
  std::vector<std::vector<cplx>> samples(
      spec.dim, std::vector<cplx>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Vec b = eval_field(spec, pts[i]);
    for (int c = 0; c < spec.dim; ++c) samples[c][i] = b[c];
  }
  return transform_samples(samples, spec.dim, kmax, n, spec.dim);
}

FourierTable fourier_from_scalar(const std::function<double(const Vec&)>& f,
                                 int dim, int kmax, int grid_per_axis) {
  int n = grid_per_axis;
  if (n <= 2 * kmax) throw ConfigError("fourier_from_scalar: grid too coarse");
  auto pts = corner_grid(n, dim);
  std::vector<std::vector<cplx>> samples(1, std::vector<cplx>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) samples[0][i] = f(pts[i]);
  return transform_samples(samples, dim, kmax, n, 1);
}

FourierTable load_fourier_csv(const std::string& path, int dim,
                              int components) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open Fourier CSV: " + path);
  int kmax = 0;
  struct Row {
    std::array<int, kMaxDim> k;
    int comp;
    cplx v;
  };
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    Row r{};
    std::string tok;
    for (int a = 0; a < dim; ++a) {
      if (!std::getline(ss, tok, ',')) throw ConfigError("short CSV row");
      r.k[a] = std::stoi(tok);
      kmax = std::max(kmax, std::abs(r.k[a]));
    }
    if (!std::getline(ss, tok, ',')) throw ConfigError("missing component");
    r.comp = std::stoi(tok);
    if (r.comp < 0 || r.comp >= components)
      throw ConfigError("component index out of range");
    double re = 0, im = 0;
    if (!std::getline(ss, tok, ',')) throw ConfigError("missing real part");
    re = std::stod(tok);
    if (std::getline(ss, tok, ',')) im = std::stod(tok);
    r.v = cplx(re, im);
    rows.push_back(r);
  }
  FourierTable table(dim, kmax, components);
  for (const Row& r : rows) table.at(r.comp, r.k) = r.v;
  // Fill missing conjugate partners; reject inconsistent pairs.
  for (const Row& r : rows) {
    std::array<int, kMaxDim> mk{};
    for (int a = 0; a < dim; ++a) mk[a] = -r.k[a];
    cplx& partner = table.at(r.comp, mk);
    if (partner == cplx(0, 0))
      partner = std::conj(r.v);
    else if (std::abs(partner - std::conj(r.v)) > 1e-12)
      throw ConfigError("Fourier CSV is not conjugate-symmetric");
  }
  return table;
}

}  // namespace torusflow
