#include "ruelle_bf/feynman.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ruelle_bf/error.hpp"

namespace rbf {

namespace {

constexpr Complex kI{0.0, 1.0};

std::uint64_t factorial(int n) {
  std::uint64_t out = 1;
  for (int k = 2; k <= n; ++k) out *= static_cast<std::uint64_t>(k);
  return out;
}

std::size_t ipow(int base, int exp) {
  std::size_t out = 1;
  for (int k = 0; k < exp; ++k) out *= static_cast<std::size_t>(base);
  return out;
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

}  // namespace

int FeynmanGraph::valence(int v) const {
  return static_cast<int>(std::count(incidence.begin(), incidence.end(), v));
}

std::vector<int> FeynmanGraph::half_edges_at(int v) const {
  std::vector<int> out;
  for (int h = 0; h < half_edge_count(); ++h) {
    if (incidence[static_cast<std::size_t>(h)] == v) out.push_back(h);
  }
  return out;
}

std::vector<int> FeynmanGraph::tails() const {
  std::vector<int> out;
  for (int h = 0; h < half_edge_count(); ++h) {
    if (involution[static_cast<std::size_t>(h)] == h) out.push_back(h);
  }
  return out;
}

std::vector<std::pair<int, int>> FeynmanGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int h = 0; h < half_edge_count(); ++h) {
    const int p = involution[static_cast<std::size_t>(h)];
    if (h < p) out.emplace_back(h, p);
  }
  return out;
}

int FeynmanGraph::component_count() const {
  std::vector<int> parent(static_cast<std::size_t>(vertex_count));
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [a, b] : edges()) {
    const int ra = find_root(parent, incidence[static_cast<std::size_t>(a)]);
    const int rb = find_root(parent, incidence[static_cast<std::size_t>(b)]);
    if (ra != rb) parent[static_cast<std::size_t>(ra)] = rb;
  }
  int count = 0;
  for (int v = 0; v < vertex_count; ++v) count += find_root(parent, v) == v ? 1 : 0;
  return count;
}

void FeynmanGraph::validate() const {
  require(vertex_count >= 0, "graph: negative vertex count");
  require(incidence.size() == involution.size(), "graph: incidence and involution sizes differ");
  const int h_count = half_edge_count();
  for (int h = 0; h < h_count; ++h) {
    const int v = incidence[static_cast<std::size_t>(h)];
    const int p = involution[static_cast<std::size_t>(h)];
    require(v >= 0 && v < vertex_count, "graph: half-edge " + std::to_string(h) + " attached to unknown vertex");
    require(p >= 0 && p < h_count, "graph: involution out of range at " + std::to_string(h));
    require(involution[static_cast<std::size_t>(p)] == h, "graph: involution is not an involution at " + std::to_string(h));
  }
}

FeynmanGraph make_chain(int vertices) {
  require(vertices >= 1, "chain needs at least one vertex");
  FeynmanGraph g;
  g.vertex_count = vertices;
  const int h_count = 2 * vertices;
  g.incidence.resize(static_cast<std::size_t>(h_count));
  g.involution.resize(static_cast<std::size_t>(h_count));
  for (int h = 0; h < h_count; ++h) {
    g.incidence[static_cast<std::size_t>(h)] = h / 2;
    g.involution[static_cast<std::size_t>(h)] = h;
  }
  for (int v = 0; v + 1 < vertices; ++v) {
    g.involution[static_cast<std::size_t>(2 * v + 1)] = 2 * v + 2;
    g.involution[static_cast<std::size_t>(2 * v + 2)] = 2 * v + 1;
  }
  return g;
}

FeynmanGraph make_cycle(int vertices) {
  FeynmanGraph g = make_chain(vertices);
  const int last = 2 * vertices - 1;
  g.involution[0] = last;
  g.involution[static_cast<std::size_t>(last)] = 0;
  return g;
}

DiagramKind classify(const FeynmanGraph& g) {
  if (!g.is_connected()) return DiagramKind::other;
  for (int v = 0; v < g.vertex_count; ++v) {
    if (g.valence(v) != 2) return DiagramKind::other;
  }
  const auto tails = g.tails().size();
  if (tails == 2) return DiagramKind::chain;
  if (tails == 0) return DiagramKind::cycle;
  return DiagramKind::other;
}

std::string describe(const FeynmanGraph& g) {
  switch (classify(g)) {
    case DiagramKind::chain: return "chain(" + std::to_string(g.vertex_count) + ")";
    case DiagramKind::cycle: return "cycle(" + std::to_string(g.vertex_count) + ")";
    default: break;
  }
  return "graph(V=" + std::to_string(g.vertex_count) + ",E=" + std::to_string(g.edge_count()) +
         ",T=" + std::to_string(g.tails().size()) + ")";
}

int hbar_exponent(const FeynmanGraph& g) { return g.vertex_count + g.loop_count(); }

std::vector<FeynmanGraph> enumerate_bivalent_connected(int vertices) {
  require(vertices >= 1, "bivalent enumeration needs at least one vertex");
  return {make_chain(vertices), make_cycle(vertices)};
}

std::vector<FeynmanGraph> enumerate_connected_quadratic(int order) {
  require(order >= 1, "diagram order must be at least 1");
  if (order == 1) return {make_chain(1)};
  return {make_chain(order), make_cycle(order - 1)};
}

namespace {

// Backtracking over half-edge maps a -> b that commute with the involutions.
class IsomorphismSearch {
 public:
  IsomorphismSearch(const FeynmanGraph& a, const FeynmanGraph& b, bool fix_tails)
      : a_(a), b_(b), fix_tails_(fix_tails) {}

  std::uint64_t count(bool stop_at_first) {
    stop_ = stop_at_first;
    if (a_.vertex_count != b_.vertex_count || a_.half_edge_count() != b_.half_edge_count()) return 0;
    const int isolated_a = isolated_count(a_);
    if (isolated_a != isolated_count(b_)) return 0;
    build_order();
    half_map_.assign(static_cast<std::size_t>(a_.half_edge_count()), -1);
    half_used_.assign(static_cast<std::size_t>(b_.half_edge_count()), false);
    vertex_map_.assign(static_cast<std::size_t>(a_.vertex_count), -1);
    vertex_used_.assign(static_cast<std::size_t>(b_.vertex_count), false);
    found_ = 0;
    recurse(0);
    return found_ * factorial(isolated_a);
  }

 private:
  static int isolated_count(const FeynmanGraph& g) {
    int n = 0;
    for (int v = 0; v < g.vertex_count; ++v) n += g.valence(v) == 0 ? 1 : 0;
    return n;
  }

  // Order where each half-edge is preceded, when possible, by its partner or a sibling.
  void build_order() {
    const int h_count = a_.half_edge_count();
    std::vector<bool> seen(static_cast<std::size_t>(h_count), false);
    order_.clear();
    for (int start = 0; start < h_count; ++start) {
      if (seen[static_cast<std::size_t>(start)]) continue;
      std::vector<int> queue{start};
      seen[static_cast<std::size_t>(start)] = true;
      for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const int h = queue[qi];
        order_.push_back(h);
        std::vector<int> next = a_.half_edges_at(a_.incidence[static_cast<std::size_t>(h)]);
        next.push_back(a_.involution[static_cast<std::size_t>(h)]);
        for (int n : next) {
          if (!seen[static_cast<std::size_t>(n)]) {
            seen[static_cast<std::size_t>(n)] = true;
            queue.push_back(n);
          }
        }
      }
    }
  }

  bool compatible(int h, int image) const {
    if (half_used_[static_cast<std::size_t>(image)]) return false;
    const bool tail_a = a_.involution[static_cast<std::size_t>(h)] == h;
    const bool tail_b = b_.involution[static_cast<std::size_t>(image)] == image;
    if (tail_a != tail_b) return false;
    if (fix_tails_ && tail_a && image != h) return false;
    const int va = a_.incidence[static_cast<std::size_t>(h)];
    const int vb = b_.incidence[static_cast<std::size_t>(image)];
    const int mapped = vertex_map_[static_cast<std::size_t>(va)];
    if (mapped >= 0) return mapped == vb;
    if (vertex_used_[static_cast<std::size_t>(vb)]) return false;
    return a_.valence(va) == b_.valence(vb);
  }

  void recurse(std::size_t depth) {
    if (stop_ && found_ > 0) return;
    if (depth == order_.size()) {
      ++found_;
      return;
    }
    const int h = order_[depth];
    const int partner = a_.involution[static_cast<std::size_t>(h)];
    std::vector<int> candidates;
    if (partner != h && half_map_[static_cast<std::size_t>(partner)] >= 0) {
      candidates.push_back(b_.involution[static_cast<std::size_t>(half_map_[static_cast<std::size_t>(partner)])]);
    } else {
      const int mapped = vertex_map_[static_cast<std::size_t>(a_.incidence[static_cast<std::size_t>(h)])];
      if (mapped >= 0) {
        candidates = b_.half_edges_at(mapped);
      } else {
        candidates.resize(static_cast<std::size_t>(b_.half_edge_count()));
        std::iota(candidates.begin(), candidates.end(), 0);
      }
    }
    for (int image : candidates) {
      if (!compatible(h, image)) continue;
      const int va = a_.incidence[static_cast<std::size_t>(h)];
      const int vb = b_.incidence[static_cast<std::size_t>(image)];
      const bool new_vertex = vertex_map_[static_cast<std::size_t>(va)] < 0;
      if (new_vertex) {
        vertex_map_[static_cast<std::size_t>(va)] = vb;
        vertex_used_[static_cast<std::size_t>(vb)] = true;
      }
      half_map_[static_cast<std::size_t>(h)] = image;
      half_used_[static_cast<std::size_t>(image)] = true;
      recurse(depth + 1);
      half_map_[static_cast<std::size_t>(h)] = -1;
      half_used_[static_cast<std::size_t>(image)] = false;
      if (new_vertex) {
        vertex_map_[static_cast<std::size_t>(va)] = -1;
        vertex_used_[static_cast<std::size_t>(vb)] = false;
      }
    }
  }

  const FeynmanGraph& a_;
  const FeynmanGraph& b_;
  bool fix_tails_;
  bool stop_ = false;
  std::uint64_t found_ = 0;
  std::vector<int> order_;
  std::vector<int> half_map_;
  std::vector<bool> half_used_;
  std::vector<int> vertex_map_;
  std::vector<bool> vertex_used_;
};

}  // namespace

std::uint64_t automorphism_order(const FeynmanGraph& g, TailConvention tails) {
  g.validate();
  return IsomorphismSearch(g, g, tails == TailConvention::labeled).count(false);
}

bool isomorphic(const FeynmanGraph& a, const FeynmanGraph& b) {
  a.validate();
  b.validate();
  return IsomorphismSearch(a, b, false).count(true) > 0;
}

std::vector<int> canonical_form(const FeynmanGraph& g) {
  g.validate();
  const int v_count = g.vertex_count;
  std::vector<std::vector<int>> at(static_cast<std::size_t>(v_count));
  for (int v = 0; v < v_count; ++v) at[static_cast<std::size_t>(v)] = g.half_edges_at(v);

  std::vector<int> perm(static_cast<std::size_t>(v_count));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best;
  std::vector<int> new_id(static_cast<std::size_t>(g.half_edge_count()));

  do {
    // perm[u] = old vertex placed at new position u
    std::vector<int> offset(static_cast<std::size_t>(v_count) + 1, 0);
    for (int u = 0; u < v_count; ++u) {
      offset[static_cast<std::size_t>(u) + 1] =
          offset[static_cast<std::size_t>(u)] + static_cast<int>(at[static_cast<std::size_t>(perm[static_cast<std::size_t>(u)])].size());
    }
    std::vector<std::vector<int>> local(static_cast<std::size_t>(v_count));
    for (int u = 0; u < v_count; ++u) {
      local[static_cast<std::size_t>(u)].resize(at[static_cast<std::size_t>(perm[static_cast<std::size_t>(u)])].size());
      std::iota(local[static_cast<std::size_t>(u)].begin(), local[static_cast<std::size_t>(u)].end(), 0);
    }
    std::function<void(int)> rec = [&](int u) {
      if (u == v_count) {
        for (int w = 0; w < v_count; ++w) {
          const auto& hs = at[static_cast<std::size_t>(perm[static_cast<std::size_t>(w)])];
          for (std::size_t j = 0; j < hs.size(); ++j) {
            new_id[static_cast<std::size_t>(hs[j])] = offset[static_cast<std::size_t>(w)] + local[static_cast<std::size_t>(w)][j];
          }
        }
        std::vector<int> code;
        code.push_back(v_count);
        for (int w = 0; w < v_count; ++w) {
          code.push_back(static_cast<int>(at[static_cast<std::size_t>(perm[static_cast<std::size_t>(w)])].size()));
        }
        std::vector<int> partner(static_cast<std::size_t>(g.half_edge_count()));
        for (int h = 0; h < g.half_edge_count(); ++h) {
          partner[static_cast<std::size_t>(new_id[static_cast<std::size_t>(h)])] =
              new_id[static_cast<std::size_t>(g.involution[static_cast<std::size_t>(h)])];
        }
        code.insert(code.end(), partner.begin(), partner.end());
        if (best.empty() || code < best) best = std::move(code);
        return;
      }
      auto& l = local[static_cast<std::size_t>(u)];
      std::sort(l.begin(), l.end());
      do {
        rec(u + 1);
      } while (std::next_permutation(l.begin(), l.end()));
    };
    rec(0);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (best.empty()) best.push_back(0);
  return best;
}

SymmetricTensor::SymmetricTensor(int dim, int order) : dim_(dim), order_(order) {
  require(dim >= 1, "tensor dimension must be positive");
  require(order >= 0, "tensor order must be non-negative");
  data_.assign(ipow(dim, order), Complex(0.0, 0.0));
}

SymmetricTensor SymmetricTensor::from_matrix(const CMatrix& c) {
  require(c.rows() == c.cols(), "quadratic form needs a square matrix");
  SymmetricTensor t(static_cast<int>(c.rows()), 2);
  for (int i = 0; i < c.rows(); ++i) {
    for (int j = 0; j < c.cols(); ++j) t.set({i, j}, c(i, j));
  }
  return t;
}

SymmetricTensor SymmetricTensor::from_scalar(Complex c, int order) {
  SymmetricTensor t(1, order);
  t.data_[0] = c;
  return t;
}

std::size_t SymmetricTensor::flat_index(const std::vector<int>& idx) const {
  require(static_cast<int>(idx.size()) == order_, "tensor index has wrong length");
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (int i : idx) {
    require(i >= 0 && i < dim_, "tensor index out of range");
    flat += static_cast<std::size_t>(i) * stride;
    stride *= static_cast<std::size_t>(dim_);
  }
  return flat;
}

Complex SymmetricTensor::at(const std::vector<int>& idx) const { return data_[flat_index(idx)]; }

void SymmetricTensor::set(const std::vector<int>& idx, Complex value) { data_[flat_index(idx)] = value; }

SymmetricTensor SymmetricTensor::symmetrized() const {
  SymmetricTensor out(dim_, order_);
  std::vector<int> idx(static_cast<std::size_t>(order_));
  std::vector<int> perm(static_cast<std::size_t>(order_));
  const double norm = 1.0 / static_cast<double>(factorial(order_));
  for (std::size_t flat = 0; flat < data_.size(); ++flat) {
    std::size_t rest = flat;
    for (auto& i : idx) {
      i = static_cast<int>(rest % static_cast<std::size_t>(dim_));
      rest /= static_cast<std::size_t>(dim_);
    }
    std::iota(perm.begin(), perm.end(), 0);
    Complex acc(0.0, 0.0);
    do {
      std::vector<int> p(idx.size());
      for (std::size_t j = 0; j < idx.size(); ++j) p[j] = idx[static_cast<std::size_t>(perm[j])];
      acc += at(p);
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.data_[flat] = acc * norm;
  }
  return out;
}

bool SymmetricTensor::is_symmetric(double tol) const {
  const SymmetricTensor s = symmetrized();
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (std::abs(s.data_[k] - data_[k]) > tol) return false;
  }
  return true;
}

SymmetricTensor SymmetricTensor::scaled(Complex s) const {
  SymmetricTensor out = *this;
  for (auto& c : out.data_) c *= s;
  return out;
}

Interaction Interaction::quadratic(const CMatrix& c) {
  Interaction out(static_cast<int>(c.rows()));
  out.set_term(SymmetricTensor::from_matrix(c));
  return out;
}

void Interaction::set_term(SymmetricTensor c) {
  if (dim_ == 0) dim_ = c.dim();
  require(c.dim() == dim_, "interaction term dimension mismatch");
  require(c.order() >= 1 && c.order() <= 4, "interaction degree must lie in 1..4");
  require(c.is_symmetric(1e-12), "interaction tensor of degree " + std::to_string(c.order()) + " is not symmetric");
  const int d = c.order();
  terms_.erase(d);
  terms_.emplace(d, std::move(c));
}

const SymmetricTensor& Interaction::term(int d) const {
  auto it = terms_.find(d);
  if (it == terms_.end()) fail(ErrorCode::invalid_argument, "interaction has no term of degree " + std::to_string(d));
  return it->second;
}

Complex Interaction::evaluate(const CVector& x) const {
  require(x.size() == dim_, "interaction argument has wrong dimension");
  Complex total(0.0, 0.0);
  for (const auto& [d, c] : terms_) {
    const auto& data = c.data();
    for (std::size_t flat = 0; flat < data.size(); ++flat) {
      std::size_t rest = flat;
      Complex prod = data[flat];
      for (int j = 0; j < d; ++j) {
        prod *= x(static_cast<Eigen::Index>(rest % static_cast<std::size_t>(dim_)));
        rest /= static_cast<std::size_t>(dim_);
      }
      total += prod;
    }
  }
  return total;
}

bool Interaction::is_zero() const {
  for (const auto& [d, c] : terms_) {
    (void)d;
    for (const auto& v : c.data()) {
      if (v != Complex(0.0, 0.0)) return false;
    }
  }
  return true;
}

PropagatorKernel heat_kernel_propagator(const CMatrix& generator, const CMatrix& gauge_fixing, double L1, double L2,
                                        Complex lambda) {
  require(generator.rows() == generator.cols(), "propagator: generator must be square");
  require(gauge_fixing.cols() == generator.rows(), "propagator: gauge-fixing operator has wrong shape");
  require(L1 >= 0.0 && L1 <= L2 && !std::isnan(L2), "propagator: scale window must satisfy 0 <= L1 <= L2");
  require(std::isfinite(L1), "propagator: L1 must be finite");
  const auto n = generator.rows();
  PropagatorKernel out;
  out.L1 = L1;
  out.L2 = L2;
  out.lambda = lambda;
  if (L1 == L2) {
    out.matrix = CMatrix::Zero(gauge_fixing.rows(), n);
    return out;
  }
  const CMatrix shifted = generator + lambda * CMatrix::Identity(n, n);
  CMatrix window = L1 == 0.0 ? CMatrix::Identity(n, n) : matrix_exp(-L1 * shifted);
  if (std::isinf(L2)) {
    const CVector spec = eigenvalues(shifted);
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      if (!(spec(i).real() > 0.0)) fail(ErrorCode::non_convergence, "IR divergence: lambda-regularization required");
    }
  } else {
    window -= matrix_exp(-L2 * shifted);
  }
  out.matrix = gauge_fixing * solve(shifted, window, "propagator: shifted generator is singular");
  if (!is_finite(out.matrix)) fail(ErrorCode::non_convergence, "propagator has non-finite entries");
  return out;
}

namespace {

// Dense tensor, first index fastest.
struct DenseTensor {
  int dim = 1;
  int order = 0;
  std::vector<Complex> data{Complex(1.0, 0.0)};
};

DenseTensor apply_matrix(const DenseTensor& t, int slot, const CMatrix& k) {
  DenseTensor out = t;
  const std::size_t stride = ipow(t.dim, slot);
  const std::size_t d = static_cast<std::size_t>(t.dim);
  for (std::size_t flat = 0; flat < t.data.size(); ++flat) {
    const std::size_t i = (flat / stride) % d;
    const std::size_t base = flat - i * stride;
    Complex acc(0.0, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      acc += k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * t.data[base + j * stride];
    }
    out.data[flat] = acc;
  }
  return out;
}

DenseTensor contract_vector(const DenseTensor& t, int slot, const CVector& v) {
  DenseTensor out;
  out.dim = t.dim;
  out.order = t.order - 1;
  out.data.assign(ipow(t.dim, out.order), Complex(0.0, 0.0));
  const std::size_t stride = ipow(t.dim, slot);
  const std::size_t d = static_cast<std::size_t>(t.dim);
  for (std::size_t flat = 0; flat < t.data.size(); ++flat) {
    const std::size_t j = (flat / stride) % d;
    const std::size_t low = flat % stride;
    const std::size_t high = flat / (stride * d);
    out.data[low + high * stride] += v(static_cast<Eigen::Index>(j)) * t.data[flat];
  }
  return out;
}

}  // namespace

Complex graph_weight(const FeynmanGraph& g, const PropagatorKernel& propagator, const Interaction& interaction,
                     const CVector& external, WeightConvention convention) {
  g.validate();
  const int dim = interaction.dim();
  require(propagator.matrix.rows() == dim && propagator.matrix.cols() == dim,
          "graph weight: propagator dimension does not match the interaction");
  require(external.size() == dim, "graph weight: external vector has wrong dimension");
  const CMatrix k = 0.5 * (propagator.matrix + propagator.matrix.transpose());

  const auto edge_list = g.edges();
  std::vector<int> edge_of(static_cast<std::size_t>(g.half_edge_count()), -1);
  for (std::size_t e = 0; e < edge_list.size(); ++e) {
    edge_of[static_cast<std::size_t>(edge_list[e].first)] = static_cast<int>(e);
    edge_of[static_cast<std::size_t>(edge_list[e].second)] = static_cast<int>(e);
  }

  // Dressed vertex tensors: tails contracted with the external vector, the second end of
  // every edge contracted with the propagator. Remaining slots are indexed by edge ids.
  struct Dressed {
    DenseTensor tensor;
    std::vector<int> slot_edges;
    int complete_at = -1;
  };
  std::vector<Dressed> dressed(static_cast<std::size_t>(g.vertex_count));
  for (int v = 0; v < g.vertex_count; ++v) {
    const auto hs = g.half_edges_at(v);
    const int d = static_cast<int>(hs.size());
    DenseTensor t;
    t.dim = dim;
    t.order = d;
    if (d > 0) {
      const SymmetricTensor& c = interaction.term(d);
      const double fact = static_cast<double>(factorial(d));
      t.data.resize(c.data().size());
      for (std::size_t i = 0; i < c.data().size(); ++i) t.data[i] = fact * c.data()[i];
    }
    for (int s = 0; s < d; ++s) {
      const int h = hs[static_cast<std::size_t>(s)];
      const int p = g.involution[static_cast<std::size_t>(h)];
      if (p != h && h > p) t = apply_matrix(t, s, k);
    }
    Dressed& out = dressed[static_cast<std::size_t>(v)];
    for (int s = d - 1; s >= 0; --s) {
      const int h = hs[static_cast<std::size_t>(s)];
      if (g.involution[static_cast<std::size_t>(h)] == h) t = contract_vector(t, s, external);
    }
    for (int h : hs) {
      if (g.involution[static_cast<std::size_t>(h)] != h) {
        out.slot_edges.push_back(edge_of[static_cast<std::size_t>(h)]);
        out.complete_at = std::max(out.complete_at, edge_of[static_cast<std::size_t>(h)]);
      }
    }
    out.tensor = std::move(t);
  }

  Complex prefactor(1.0, 0.0);
  const int e_count = static_cast<int>(edge_list.size());
  if (convention == WeightConvention::oscillatory) {
    prefactor = std::pow(kI, g.vertex_count + e_count);
  } else if (g.vertex_count % 2 == 1) {
    prefactor = Complex(-1.0, 0.0);
  }

  Complex constant(1.0, 0.0);
  std::vector<std::vector<int>> completing(static_cast<std::size_t>(std::max(e_count, 1)));
  for (int v = 0; v < g.vertex_count; ++v) {
    const Dressed& dv = dressed[static_cast<std::size_t>(v)];
    if (dv.complete_at < 0) {
      constant *= dv.tensor.data[0];
    } else {
      completing[static_cast<std::size_t>(dv.complete_at)].push_back(v);
    }
  }
  if (e_count == 0 || constant == Complex(0.0, 0.0)) return prefactor * constant;

  std::vector<int> assignment(static_cast<std::size_t>(e_count), 0);
  auto lookup = [&](const Dressed& dv) {
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (int e : dv.slot_edges) {
      flat += static_cast<std::size_t>(assignment[static_cast<std::size_t>(e)]) * stride;
      stride *= static_cast<std::size_t>(dim);
    }
    return dv.tensor.data[flat];
  };
  std::function<Complex(int, Complex)> rec = [&](int e, Complex partial) -> Complex {
    if (e == e_count) return partial;
    Complex acc(0.0, 0.0);
    for (int i = 0; i < dim; ++i) {
      assignment[static_cast<std::size_t>(e)] = i;
      Complex next = partial;
      for (int v : completing[static_cast<std::size_t>(e)]) {
        next *= lookup(dressed[static_cast<std::size_t>(v)]);
        if (next == Complex(0.0, 0.0)) break;
      }
      if (next != Complex(0.0, 0.0)) acc += rec(e + 1, next);
    }
    return acc;
  };
  return prefactor * rec(0, constant);
}

HbarPolynomial gamma_sum(const PropagatorKernel& propagator, const Interaction& interaction, const CVector& external,
                         int max_vertices, WeightConvention convention, Grading grading) {
  require(max_vertices >= 1, "gamma_sum: max order must be at least 1");
  std::map<int, Complex> collected;
  std::vector<int> degrees;
  for (const auto& [d, c] : interaction.terms()) {
    bool nonzero = false;
    for (const auto& x : c.data()) nonzero = nonzero || x != Complex(0.0, 0.0);
    if (nonzero) degrees.push_back(d);
  }
  const bool allow_tails = !external.isZero(0.0);

  for (int v_count = 1; v_count <= max_vertices && !degrees.empty(); ++v_count) {
    std::vector<std::size_t> choice(static_cast<std::size_t>(v_count), 0);
    while (true) {
      FeynmanGraph g;
      g.vertex_count = v_count;
      double norm = static_cast<double>(factorial(v_count));
      for (int v = 0; v < v_count; ++v) {
        const int d = degrees[choice[static_cast<std::size_t>(v)]];
        norm *= static_cast<double>(factorial(d));
        for (int j = 0; j < d; ++j) g.incidence.push_back(v);
      }
      const int h_count = g.half_edge_count();
      g.involution.assign(static_cast<std::size_t>(h_count), -1);

      std::function<void()> rec = [&]() {
        int h = -1;
        for (int x = 0; x < h_count; ++x) {
          if (g.involution[static_cast<std::size_t>(x)] < 0) {
            h = x;
            break;
          }
        }
        if (h < 0) {
          if (!g.is_connected()) return;
          const Complex w = graph_weight(g, propagator, interaction, external, convention);
          const int exponent = grading == Grading::vertices ? v_count : hbar_exponent(g);
          collected[exponent] += w / norm;
          return;
        }
        if (allow_tails) {
          g.involution[static_cast<std::size_t>(h)] = h;
          rec();
        }
        for (int p = h + 1; p < h_count; ++p) {
          if (g.involution[static_cast<std::size_t>(p)] >= 0) continue;
          g.involution[static_cast<std::size_t>(h)] = p;
          g.involution[static_cast<std::size_t>(p)] = h;
          rec();
          g.involution[static_cast<std::size_t>(p)] = -1;
        }
        g.involution[static_cast<std::size_t>(h)] = -1;
      };
      rec();

      std::size_t pos = 0;
      while (pos < choice.size() && ++choice[pos] == degrees.size()) choice[pos++] = 0;
      if (pos == choice.size()) break;
    }
  }
  const int top = collected.empty() ? max_vertices : std::max(max_vertices, collected.rbegin()->first);
  HbarPolynomial out(top);
  for (const auto& [p, c] : collected) out.add_to_coefficient(p, c);
  return out;
}

EffectiveQuadratic EffectiveQuadratic::from_interaction(const Interaction& interaction, int max_order) {
  require(max_order >= 1, "effective interaction order must be at least 1");
  for (const auto& [d, c] : interaction.terms()) {
    (void)c;
    require(d == 2, "effective quadratic form needs a purely quadratic interaction");
  }
  const int n = interaction.dim();
  EffectiveQuadratic out{MatrixSeries(n, max_order), HbarPolynomial(max_order)};
  if (interaction.has_degree(2)) {
    const SymmetricTensor& c = interaction.term(2);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out.kernel.coefficient(1)(i, j) = 2.0 * c.at({i, j});
    }
  }
  return out;
}

Complex EffectiveQuadratic::evaluate(const CVector& phi, Complex hbar) const {
  const CMatrix g = kernel.evaluate(hbar);
  return 0.5 * (phi.transpose() * g * phi)(0, 0) + constant.evaluate(hbar);
}

EffectiveQuadratic rge_evolve(const EffectiveQuadratic& at_L1, const PropagatorKernel& window) {
  const auto n = at_L1.kernel.dim();
  const int order = at_L1.max_order();
  require(window.matrix.rows() == n && window.matrix.cols() == n, "rge: propagator dimension mismatch");
  require(window.L1 >= 0.0 && window.L1 <= window.L2 && std::isfinite(window.L2), "rge: scales must satisfy 0 <= L1 <= L2 < inf");
  const CMatrix p = 0.5 * (window.matrix + window.matrix.transpose());
  const CMatrix id = CMatrix::Identity(n, n);

  const MatrixSeries x = p * at_L1.kernel;
  const CMatrix x0 = x.coefficient(0);
  const double radius = spectral_radius(x0);
  if (radius >= 1.0) {
    throw NonConvergenceError(radius, "rge: geometric series in P G diverges at hbar^0 (spectral radius " +
                                          std::to_string(radius) + ")");
  }
  const CMatrix a_inv = inverse(id + x0, "rge: 1 + P G_0 is singular");
  MatrixSeries y = a_inv * x;
  y.coefficient(0).setZero();

  MatrixSeries inv_y(n, order);
  inv_y.coefficient(0) = id;
  MatrixSeries power = inv_y;
  MatrixSeries log_y(n, order);
  for (int k = 1; k <= order; ++k) {
    power = power * y;
    if (power.is_zero()) break;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    for (int q = 0; q <= order; ++q) {
      inv_y.coefficient(q) += (k % 2 == 1 ? -1.0 : 1.0) * power.coefficient(q);
      log_y.coefficient(q) += (sign / k) * power.coefficient(q);
    }
  }

  EffectiveQuadratic out;
  out.kernel = at_L1.kernel * (inv_y * a_inv);
  HbarPolynomial logdet = trace(log_y);
  Complex log_det0(0.0, 0.0);
  const CVector ev = eigenvalues(x0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) log_det0 += log1p(ev(i));
  logdet.add_to_coefficient(0, log_det0);

  out.constant = at_L1.constant.truncated(order);
  for (int q = 1; q <= order; ++q) out.constant.add_to_coefficient(q, 0.5 * kI * logdet.coefficient(q - 1));
  return out;
}

}  // namespace rbf
