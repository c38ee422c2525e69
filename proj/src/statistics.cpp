#include "egraph/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "egraph/error.hpp"

namespace egraph {
namespace {

void require_common_grid(std::span<const GraphShape> graphs) {
  for (const GraphShape& g : graphs) {
    if (g.dim() != graphs.front().dim() ||
        g.samples() != graphs.front().samples()) {
      throw InvalidInput("all graphs must share edge grid and dimension");
    }
  }
}

std::vector<GraphShape> pad_to_common_size(std::span<const GraphShape> graphs) {
  std::size_t n = 0;
  for (const GraphShape& g : graphs) n = std::max(n, g.size());
  std::vector<GraphShape> out;
  out.reserve(graphs.size());
  for (const GraphShape& g : graphs) out.push_back(pad(g, n - g.size()));
  return out;
}

struct RegisteredSet {
  std::vector<GraphShape> graphs;
  std::vector<Permutation> permutations;
};

RegisteredSet register_all(const GraphShape& reference,
                           std::span<const GraphShape> graphs,
                           const MatchOptions& options) {
  RegisteredSet out;
  for (const GraphShape& g : graphs) {
    Registration r = register_graphs(reference, g, options);
    out.graphs.push_back(std::move(r.registered));
    out.permutations.push_back(std::move(r.match.permutation));
  }
  return out;
}

// Entry-wise average of registered edge Srvfs, each aligned to the
// reference's edge (or to the first sample carrying the edge when the
// reference has none). Null edges contribute zero.
GraphShape average(const GraphShape& reference,
                   std::span<const GraphShape> registered,
                   const AlignOptions& options) {
  const std::size_t n = reference.size();
  const double m = static_cast<double>(registered.size());
  GraphShape out(n, reference.dim(), reference.samples());
  for (std::size_t i = 0; i < n; ++i) out.set_label(i, reference.labels()[i]);

  Eigen::MatrixXd positions =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), reference.dim());
  int with_positions = 0;
  for (const GraphShape& g : registered) {
    if (g.positions()) {
      positions += *g.positions();
      ++with_positions;
    }
  }
  if (with_positions > 0) out.set_positions(positions / with_positions);

  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const Edge* ref = reference.edge(a, b);
      std::vector<const Edge*> present;
      for (const GraphShape& g : registered) {
        if (const Edge* e = g.edge(a, b)) present.push_back(e);
      }
      if (present.empty()) continue;
      if (!ref) ref = present.front();

      Eigen::MatrixXd sum =
          Eigen::MatrixXd::Zero(reference.samples(), reference.dim());
      Eigen::RowVectorXd start = Eigen::RowVectorXd::Zero(reference.dim());
      for (const Edge* e : present) {
        const Alignment al = align(ref->q, e->q, options);
        sum += al.aligned.values;
        const Eigen::MatrixXd& p = e->curve.points;
        start += al.reversed ? p.row(p.rows() - 1) : p.row(0);
      }
      Srvf q{sum / m};
      if (q.is_null()) continue;
      out.set_edge(a, b,
                   Edge::from_srvf(std::move(q),
                                   start / static_cast<double>(present.size()),
                                   ref->from));
    }
  }
  return out;
}

std::vector<double> edge_presence(std::span<const GraphShape> registered) {
  if (registered.empty()) return {};
  const std::size_t n = registered.front().size();
  std::vector<double> presence(n * (n > 0 ? n - 1 : 0) / 2, 0.0);
  for (const GraphShape& g : registered) {
    for (const auto& [i, j] : g.edge_list()) {
      presence[GraphShape::pair_index(i, j, n)] += 1.0;
    }
  }
  for (double& p : presence) p /= static_cast<double>(registered.size());
  return presence;
}

}  // namespace

std::string to_string(MeanMode mode) {
  return mode == MeanMode::full ? "full" : "template";
}

MeanMode parse_mean_mode(const std::string& tag) {
  if (tag == "full") return MeanMode::full;
  if (tag == "template") return MeanMode::template_;
  throw UsageError("unknown mean mode '" + tag +
                   "' (expected full or template)");
}

std::size_t template_index(std::span<const GraphShape> graphs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < graphs.size(); ++i) {
    if (graphs[i].edge_count() > graphs[best].edge_count()) best = i;
  }
  return best;
}

double karcher_variance(const GraphShape& mean,
                        std::span<const GraphShape> registered,
                        const AlignOptions& options) {
  if (registered.empty()) return 0.0;
  double sum = 0.0;
  for (const GraphShape& g : registered) {
    const double d = pre_shape_distance(mean, g, options);
    sum += d * d;
  }
  return sum / static_cast<double>(registered.size());
}

MeanResult karcher_mean(std::span<const GraphShape> graphs,
                        const MeanOptions& options) {
  if (graphs.empty()) throw InvalidInput("mean of an empty set of graphs");
  if (options.max_iterations < 1) {
    throw UsageError("mean needs at least one iteration");
  }
  require_common_grid(graphs);
  const std::vector<GraphShape> padded = pad_to_common_size(graphs);
  const AlignOptions& align_opts = options.match.align;

  MeanResult result;
  GraphShape current = padded[template_index(padded)];
  const std::size_t rounds =
      options.mode == MeanMode::template_ ? 1 : options.max_iterations;
  for (std::size_t iter = 1; iter <= rounds; ++iter) {
    RegisteredSet regs = register_all(current, padded, options.match);
    GraphShape candidate = average(current, regs.graphs, align_opts);
    const double variance =
        karcher_variance(candidate, regs.graphs, align_opts);

    if (!result.variance_history.empty()) {
      const double previous = result.variance_history.back();
      // Converged (or no longer improving): keep the accepted iterate.
      if (!(variance < previous * (1.0 - options.relative_tolerance))) break;
    }
    result.mean = candidate;
    result.registered = std::move(regs.graphs);
    result.permutations = std::move(regs.permutations);
    result.variance_history.push_back(variance);
    result.iterations = iter;
    current = std::move(candidate);
    if (variance == 0.0) break;
  }
  result.final_variance = result.variance_history.back();
  result.presence = edge_presence(result.registered);
  return result;
}

GraphShape display_mean(const MeanResult& result, double presence_threshold) {
  GraphShape out = result.mean;
  const std::size_t n = out.size();
  for (const auto& [i, j] : result.mean.edge_list()) {
    if (result.presence[GraphShape::pair_index(i, j, n)] < presence_threshold) {
      out.clear_edge(i, j);
    }
  }
  return out;
}

Eigen::VectorXd shooting_vector(const GraphShape& mean,
                                const GraphShape& registered,
                                const AlignOptions& options) {
  if (mean.size() != registered.size() || mean.dim() != registered.dim() ||
      mean.samples() != registered.samples()) {
    throw InvalidInput("shooting vector needs a graph registered to the mean");
  }
  const std::size_t n = mean.size();
  const Eigen::Index t = mean.samples();
  const Eigen::Index d = mean.dim();
  const Eigen::Index block = t * d;
  const Eigen::VectorXd root_w = quadrature_weights(t).cwiseSqrt();

  Eigen::VectorXd v = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(n * (n > 0 ? n - 1 : 0) / 2) * block);
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, offset += block) {
      const Edge* em = mean.edge(i, j);
      const Edge* er = registered.edge(i, j);
      if (!em && !er) continue;
      const Srvf qm = mean.srvf_or_zero(i, j);
      const Srvf qr =
          (em && er) ? align(qm, er->q, options).aligned
                     : registered.srvf_or_zero(i, j);
      const Eigen::MatrixXd diff =
          root_w.asDiagonal() * (qr.values - qm.values);
      for (Eigen::Index s = 0; s < t; ++s) {
        v.segment(offset + s * d, d) = diff.row(s).transpose();
      }
    }
  }
  return v;
}

GraphShape exp_map(const GraphShape& mean, const Eigen::VectorXd& v) {
  const std::size_t n = mean.size();
  const Eigen::Index t = mean.samples();
  const Eigen::Index d = mean.dim();
  const Eigen::Index block = t * d;
  if (v.size() != static_cast<Eigen::Index>(n * (n > 0 ? n - 1 : 0) / 2) *
                      block) {
    throw InvalidInput("tangent vector length does not match the mean graph");
  }
  const Eigen::VectorXd root_w = quadrature_weights(t).cwiseSqrt();

  GraphShape out(n, d, t);
  for (std::size_t i = 0; i < n; ++i) out.set_label(i, mean.labels()[i]);
  if (mean.positions()) out.set_positions(*mean.positions());
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, offset += block) {
      const Edge* em = mean.edge(i, j);
      Eigen::MatrixXd values = em ? em->q.values : Eigen::MatrixXd::Zero(t, d);
      for (Eigen::Index s = 0; s < t; ++s) {
        values.row(s) += v.segment(offset + s * d, d).transpose() / root_w(s);
      }
      Srvf q{std::move(values)};
      if (l2_norm(q) <= 1e-12) continue;
      Eigen::RowVectorXd start = Eigen::RowVectorXd::Zero(d);
      if (em) {
        start = em->curve.points.row(0);
      } else if (mean.positions()) {
        start = mean.positions()->row(static_cast<Eigen::Index>(i));
      }
      out.set_edge(i, j, Edge::from_srvf(std::move(q), start, em ? em->from : i));
    }
  }
  return out;
}

std::size_t TangentModel::rank(double tolerance) const {
  if (singular_values.size() == 0) return 0;
  const double top = singular_values(0);
  std::size_t r = 0;
  for (Eigen::Index k = 0; k < singular_values.size(); ++k) {
    if (singular_values(k) > tolerance * top && singular_values(k) > 0.0) ++r;
  }
  return r;
}

TangentModel tangent_pca(std::span<const GraphShape> graphs,
                         const MeanOptions& options) {
  if (graphs.size() < 2) {
    throw InvalidInput("tangent PCA needs at least two graphs");
  }
  TangentModel model;
  model.mean_result = karcher_mean(graphs, options);
  model.mean = model.mean_result.mean;

  const auto m = static_cast<Eigen::Index>(graphs.size());
  const auto& regs = model.mean_result.registered;
  Eigen::VectorXd first =
      shooting_vector(model.mean, regs.front(), options.match.align);
  model.shooting_vectors.resize(m, first.size());
  model.shooting_vectors.row(0) = first.transpose();
  for (Eigen::Index i = 1; i < m; ++i) {
    model.shooting_vectors.row(i) =
        shooting_vector(model.mean, regs[static_cast<std::size_t>(i)],
                        options.match.align)
            .transpose();
  }
  model.center = model.shooting_vectors.colwise().mean().transpose();
  const Eigen::MatrixXd centered =
      model.shooting_vectors.rowwise() - model.center.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd u = svd.matrixU();
  Eigen::MatrixXd v = svd.matrixV();
  const Eigen::VectorXd sigma = svd.singularValues();
  // Sign convention: largest-magnitude entry of each direction positive.
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    Eigen::Index at = 0;
    v.col(k).cwiseAbs().maxCoeff(&at);
    if (v(at, k) < 0.0) {
      v.col(k) *= -1.0;
      u.col(k) *= -1.0;
    }
  }
  model.directions = v.transpose();
  model.singular_values =
      sigma.array().square() / static_cast<double>(m - 1);
  model.scores = u * sigma.asDiagonal();
  return model;
}

GraphShape principal_path(const TangentModel& model, std::size_t component,
                          double t) {
  if (component >= model.rank()) {
    throw InvalidInput("principal component " + std::to_string(component) +
                       " out of range (rank " + std::to_string(model.rank()) +
                       ")");
  }
  const auto k = static_cast<Eigen::Index>(component);
  const Eigen::VectorXd v = t * std::sqrt(model.singular_values(k)) *
                            model.directions.row(k).transpose();
  return exp_map(model.mean, v);
}

double variance_explained(const TangentModel& model, std::size_t r) {
  const Eigen::VectorXd& s = model.singular_values;
  const double total = s.sum();
  if (!(total > 0.0)) return 1.0;
  const auto upto =
      std::min(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s.size()));
  return std::clamp(s.head(upto).sum() / total, 0.0, 1.0);
}

}  // namespace egraph
