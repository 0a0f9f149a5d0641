#include "ltm/tensor_decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ltm/svd.hpp"

namespace ltm {
namespace {

void check_rank(const Matrix& m, int k, double rel_floor, const char* what) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() < k || s(k - 1) <= rel_floor * std::max(s(0), 1e-300))
    throw rank_error(std::string(what) + ": rank below k");
}

}  // namespace

SymmetrizedTriplet symmetrize_views(const TripletMoments& m, int k,
                                    double rank_floor) {
  check_rank(m.m_ab, k, rank_floor, "symmetrize_views m_ab");
  check_rank(m.m_ac, k, rank_floor, "symmetrize_views m_ac");
  check_rank(m.m_bc, k, rank_floor, "symmetrize_views m_bc");

  // Anchor on the witness view c:
  //   map_a = M_cb M_ab^+  sends view a onto A_c's column space,
  //   map_b = M_ca M_ba^+  likewise for view b.
  const Matrix m_cb = m.m_bc.transpose();
  const Matrix m_ca = m.m_ac.transpose();
  const Matrix m_ba = m.m_ab.transpose();

  SymmetrizedTriplet out;
  out.map_a = m_cb * pseudo_inverse(m.m_ab, rank_floor);
  out.map_b = m_ca * pseudo_inverse(m_ba, rank_floor);
  out.pair = out.map_a * m.m_ab * out.map_b.transpose();
  out.pair = 0.5 * (out.pair + out.pair.transpose()).eval();

  Tensor3 t = m.t_abc.mode_multiply(0, out.map_a).mode_multiply(1, out.map_b);
  const int d = t.dim(0);
  double asym = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l)
        asym = std::max(asym, std::abs(t(i, j, l) - t(j, i, l)));
  out.asymmetry = asym;
  out.t = t.symmetrized();
  return out;
}

Whitener make_whitener(const Matrix& pair, int k, double rank_floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(pair);
  // eigenvalues ascending; take the top k
  const int d = static_cast<int>(pair.rows());
  Vector evals = eig.eigenvalues();
  Matrix evecs = eig.eigenvectors();
  if (evals(d - 1) <= 0.0) throw rank_error("whitener: pair matrix not positive");
  if (evals(d - k) <= rank_floor * evals(d - 1))
    throw rank_error("whitener: pair matrix rank below k");
  Whitener w;
  w.w.resize(d, k);
  w.b.resize(d, k);
  for (int i = 0; i < k; ++i) {
    const int src = d - 1 - i;  // descending order
    Vector col = evecs.col(src);
    // deterministic sign: first entry of magnitude > 1e-12 positive
    for (int r = 0; r < d; ++r) {
      if (std::abs(col(r)) > 1e-12) {
        if (col(r) < 0.0) col = -col;
        break;
      }
    }
    const double root = std::sqrt(evals(src));
    w.w.col(i) = col / root;
    w.b.col(i) = col * root;
  }
  return w;
}

TripletParams decompose_triplet(const TripletMoments& m, int k,
                                const TensorOptions& opt) {
  if (k < 1) throw invalid_argument_error("decompose_triplet: k < 1");
  TripletParams out;

  if (k == 1) {
    out.a_a = m.mean_a;
    out.a_b = m.mean_b;
    out.a_c = m.mean_c;
    out.pi = Vector::Ones(1);
    out.lambda = Vector::Ones(1);
    Tensor3 recon(static_cast<int>(m.mean_a.size()),
                  static_cast<int>(m.mean_b.size()),
                  static_cast<int>(m.mean_c.size()));
    recon.add_outer(m.mean_a, m.mean_b, m.mean_c, 1.0);
    recon -= m.t_abc;
    const double denom = std::max(m.t_abc.frobenius_norm(), 1e-300);
    out.residual = recon.frobenius_norm() / denom;
    return out;
  }

  SymmetrizedTriplet sym = symmetrize_views(m, k, opt.rank_floor);
  Whitener wh = make_whitener(sym.pair, k, opt.rank_floor);
  Tensor3 tw = sym.t.mode_multiply(0, wh.w.transpose())
                   .mode_multiply(1, wh.w.transpose())
                   .mode_multiply(2, wh.w.transpose())
                   .symmetrized();

  std::mt19937_64 rng(opt.seed ^ 0xD1B54A32D192ED03ULL);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix vecs(k, k);
  Vector lambdas(k);
  std::vector<std::pair<double, Vector>> found;  // (lambda, vec) accumulated

  auto deflated_apply = [&](const Vector& th) {
    Vector r = tw.apply_sym(th);
    for (const auto& [lam, v] : found) {
      const double dot = v.dot(th);
      r -= lam * dot * dot * v;
    }
    return r;
  };
  auto deflated_cubic = [&](const Vector& th) {
    double r = tw.cubic_form(th);
    for (const auto& [lam, v] : found) {
      const double dot = v.dot(th);
      r -= lam * dot * dot * dot;
    }
    return r;
  };

  for (int comp = 0; comp < k; ++comp) {
    Vector best_theta;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < std::max(1, opt.restarts); ++restart) {
      Vector theta(k);
      for (int i = 0; i < k; ++i) theta(i) = normal(rng);
      theta.normalize();
      for (int it = 0; it < opt.iterations; ++it) {
        Vector next = deflated_apply(theta);
        const double nn = next.norm();
        if (nn < 1e-300) break;
        next /= nn;
        if ((next - theta).norm() < opt.tolerance) {
          theta = next;
          break;
        }
        theta = next;
      }
      if (deflated_cubic(theta) < 0.0) theta = -theta;
      const double val = deflated_cubic(theta);
      if (val > best_val) {
        best_val = val;
        best_theta = theta;
      }
    }
    // polish the winner
    for (int it = 0; it < opt.iterations; ++it) {
      Vector next = deflated_apply(best_theta);
      const double nn = next.norm();
      if (nn < 1e-300) break;
      next /= nn;
      const double delta = (next - best_theta).norm();
      best_theta = next;
      if (delta < opt.tolerance) break;
    }
    if (deflated_cubic(best_theta) < 0.0) best_theta = -best_theta;
    const double lam = deflated_cubic(best_theta);
    found.emplace_back(lam, best_theta);
  }

  for (int i = 0; i < k; ++i) {
    lambdas(i) = found[i].first;
    vecs.col(i) = found[i].second;
  }

  // eigen-gap confidence
  out.low_confidence = false;
  const double scale = std::max(std::abs(lambdas(0)), 1e-300);
  for (int i = 0; i < k && !out.low_confidence; ++i) {
    if (lambdas(i) <= 0.0) out.low_confidence = true;
    for (int j = i + 1; j < k; ++j)
      if (std::abs(lambdas(i) - lambdas(j)) < opt.eigen_gap_tol * scale)
        out.low_confidence = true;
  }

  // map back: pi_r = lambda_r^-2, witness columns a_r = lambda_r * B v_r
  Vector pi(k);
  Matrix a_c(sym.pair.rows(), k);
  for (int r = 0; r < k; ++r) {
    const double lam = std::max(lambdas(r), 1e-12);
    pi(r) = 1.0 / (lam * lam);
    a_c.col(r) = lambdas(r) * (wh.b * vecs.col(r));
  }
  // clamp tiny negatives, renormalize
  for (int r = 0; r < k; ++r) {
    if (pi(r) < -1e-6)
      throw rank_error("decompose_triplet: negative prior component");
    pi(r) = std::max(pi(r), 0.0);
  }
  pi /= pi.sum();

  // remaining views from cross moments: A_a = M_ac (A_c^T)^+ diag(pi)^-1
  Matrix a_ct_pinv = pseudo_inverse(a_c, opt.rank_floor).transpose();
  Matrix a_a = m.m_ac * a_ct_pinv;
  Matrix a_b = m.m_bc * a_ct_pinv;
  for (int r = 0; r < k; ++r) {
    const double q = std::max(pi(r), 1e-12);
    a_a.col(r) /= q;
    a_b.col(r) /= q;
  }

  // canonical column order: descending prior, lexicographic witness tie-break
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    if (pi(x) != pi(y)) return pi(x) > pi(y);
    for (int r = 0; r < a_c.rows(); ++r) {
      if (a_c(r, x) != a_c(r, y)) return a_c(r, x) > a_c(r, y);
    }
    return x < y;
  });
  out.pi.resize(k);
  out.lambda.resize(k);
  out.a_a.resize(a_a.rows(), k);
  out.a_b.resize(a_b.rows(), k);
  out.a_c.resize(a_c.rows(), k);
  for (int i = 0; i < k; ++i) {
    out.pi(i) = pi(order[i]);
    out.lambda(i) = lambdas(order[i]);
    out.a_a.col(i) = a_a.col(order[i]);
    out.a_b.col(i) = a_b.col(order[i]);
    out.a_c.col(i) = a_c.col(order[i]);
  }

  // reconstruction residual against the input tensor
  Tensor3 recon(out.a_a.rows(), out.a_b.rows(), out.a_c.rows());
  for (int r = 0; r < k; ++r)
    recon.add_outer(out.a_a.col(r), out.a_b.col(r), out.a_c.col(r), out.pi(r));
  recon -= m.t_abc;
  out.residual = recon.frobenius_norm() / std::max(m.t_abc.frobenius_norm(), 1e-300);
  return out;
}

Vector posterior_hidden(const Vector& x, const Matrix& a, const Vector& pi,
                        ObservationFamily family, double sigma) {
  const int k = static_cast<int>(pi.size());
  Vector logp(k);
  if (family == ObservationFamily::categorical) {
    for (int r = 0; r < k; ++r) {
      double acc = std::log(std::max(pi(r), 1e-300));
      for (int s = 0; s < x.size(); ++s) {
        if (x(s) != 0.0)
          acc += x(s) * std::log(std::max(a(s, r), 1e-300));
      }
      logp(r) = acc;
    }
  } else {
    if (sigma <= 0.0)
      throw invalid_argument_error("posterior_hidden: gaussian needs sigma > 0");
    for (int r = 0; r < k; ++r) {
      logp(r) = std::log(std::max(pi(r), 1e-300)) -
                (x - a.col(r)).squaredNorm() / (2.0 * sigma * sigma);
    }
  }
  const double mx = logp.maxCoeff();
  Vector p = (logp.array() - mx).exp();
  return p / p.sum();
}

}  // namespace ltm
