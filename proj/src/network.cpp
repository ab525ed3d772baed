#include "dhqr/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

namespace dhqr {

namespace {

using json = nlohmann::json;

std::vector<int> dense_dims(const ArchitectureSpec& arch) {
  if (arch.input_dim <= 0)
    throw std::invalid_argument("ArchitectureSpec: input_dim must be positive");
  std::vector<int> dims{arch.input_dim};
  bool has_dense = false;
  for (const auto& l : arch.layers) {
    if (l.kind == LayerSpec::Kind::dense) {
      if (l.units <= 0)
        throw std::invalid_argument("ArchitectureSpec: units must be positive");
      dims.push_back(l.units);
      has_dense = true;
    } else {
      if (!(l.rate > 0.0 && l.rate < 1.0))
        throw std::invalid_argument(
            "ArchitectureSpec: dropout rate must be in (0,1)");
      if (!has_dense)
        throw std::invalid_argument(
            "ArchitectureSpec: dropout before any dense layer");
    }
  }
  if (!has_dense)
    throw std::invalid_argument("ArchitectureSpec: needs at least one layer");
  dims.push_back(1);  // linear output unit
  return dims;
}

// Per-sample forward pass recording what backprop needs.
struct Workspace {
  std::vector<std::vector<double>> inputs;   // per dense layer
  std::vector<std::vector<double>> preacts;  // per dense layer
  std::vector<std::vector<double>> masks;    // per dropout marker, scaled
};

double forward_pass(const NetworkModel& m, const std::vector<double>& features,
                    ForwardMode mode, std::mt19937_64* mask_rng,
                    Workspace* ws) {
  if (static_cast<int>(features.size()) != m.arch.input_dim)
    throw std::invalid_argument("forward: feature dimension mismatch");
  std::vector<double> h = features;
  std::size_t dense = 0, drop = 0;
  auto apply_dense = [&](bool relu) {
    const int out = m.dims[dense + 1];
    const int in = m.dims[dense];
    std::vector<double> z(static_cast<std::size_t>(out));
    const auto& W = m.weights[dense];
    const auto& b = m.biases[dense];
    for (int o = 0; o < out; ++o) {
      double acc = b[static_cast<std::size_t>(o)];
      const double* row = W.data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * h[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] = acc;
    }
    if (ws) {
      ws->inputs.push_back(h);
      ws->preacts.push_back(z);
    }
    if (relu)
      for (auto& v : z) v = std::max(v, 0.0);
    h = std::move(z);
    ++dense;
  };
  for (const auto& l : m.arch.layers) {
    if (l.kind == LayerSpec::Kind::dense) {
      apply_dense(true);
    } else {
      std::vector<double> mask(h.size(), 1.0);
      if (mode == ForwardMode::train) {
        std::bernoulli_distribution keep(1.0 - l.rate);
        const double scale = 1.0 / (1.0 - l.rate);
        for (auto& mv : mask) mv = keep(*mask_rng) ? scale : 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) h[i] *= mask[i];
      }
      ++drop;
      if (ws) ws->masks.push_back(std::move(mask));
    }
  }
  apply_dense(false);  // linear output
  return h[0];
}

void backward_pass(const NetworkModel& m, const Workspace& ws,
                   double output_grad, Gradients& g) {
  const std::size_t n_dense = m.weights.size();
  std::vector<double> delta{output_grad};
  std::size_t dense = n_dense;  // walk layers in reverse
  std::size_t drop = ws.masks.size();

  auto back_dense = [&](bool relu_below) {
    --dense;
    const int out = m.dims[dense + 1];
    const int in = m.dims[dense];
    const auto& input = ws.inputs[dense];
    auto& gW = g.weights[dense];
    auto& gb = g.biases[dense];
    std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
    const auto& W = m.weights[dense];
    for (int o = 0; o < out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      gb[static_cast<std::size_t>(o)] += d;
      double* gw_row = gW.data() + static_cast<std::size_t>(o) * in;
      const double* w_row = W.data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) {
        gw_row[i] += d * input[static_cast<std::size_t>(i)];
        prev[static_cast<std::size_t>(i)] += d * w_row[i];
      }
    }
    delta = std::move(prev);
    (void)relu_below;
  };

  back_dense(false);  // output layer
  for (auto it = m.arch.layers.rbegin(); it != m.arch.layers.rend(); ++it) {
    if (it->kind == LayerSpec::Kind::dropout) {
      const auto& mask = ws.masks[--drop];
      for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= mask[i];
    } else {
      // ReLU gate on this dense layer's pre-activation, then the layer itself.
      const auto& z = ws.preacts[dense - 1];
      for (std::size_t i = 0; i < delta.size(); ++i)
        if (z[i] <= 0.0) delta[i] = 0.0;
      back_dense(true);
    }
  }
}

double mean_infer_score(const NetworkModel& m,
                        const std::vector<std::vector<double>>& x,
                        const std::vector<double>& y, const ScoreParams& p) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    total += huber_quantile_score(forward_pass(m, x[i], ForwardMode::infer,
                                               nullptr, nullptr),
                                  y[i], p);
  return total / static_cast<double>(x.size());
}

struct EpochRunner {
  NetworkModel& model;
  const std::vector<std::vector<double>>& x;
  const std::vector<double>& y;
  const ScoreParams& p;
  const TrainConfig& cfg;
  AdamState state;
  std::mt19937_64 rng;
  std::vector<std::size_t> order;
  long step = 0;

  EpochRunner(NetworkModel& m, const std::vector<std::vector<double>>& x_,
              const std::vector<double>& y_, const ScoreParams& p_,
              const TrainConfig& cfg_)
      : model(m), x(x_), y(y_), p(p_), cfg(cfg_), state(init_adam(m)),
        rng(cfg_.seed ^ 0x9e3779b97f4a7c15ULL) {
    order.resize(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  }

  // One full shuffled pass; returns the mean training score over samples.
  double run(int epoch_index) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<std::vector<double>> bx;
      std::vector<double> by;
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(x[order[i]]);
        by.push_back(y[order[i]]);
      }
      auto [loss, grads] =
          loss_and_gradients(model, bx, by, p, ForwardMode::train, rng());
      if (!std::isfinite(loss))
        throw std::runtime_error("training diverged at epoch " +
                                 std::to_string(epoch_index));
      adam_step(model, grads, state, cfg, ++step);
      total += loss * static_cast<double>(end - start);
    }
    return total / static_cast<double>(order.size());
  }
};

}  // namespace

ArchitectureSpec ArchitectureSpec::model1(int input_dim) {
  return {input_dim,
          {{LayerSpec::Kind::dense, 64, 0.0},
           {LayerSpec::Kind::dense, 64, 0.0},
           {LayerSpec::Kind::dense, 64, 0.0},
           {LayerSpec::Kind::dense, 32, 0.0}}};
}

ArchitectureSpec ArchitectureSpec::model2(int input_dim) {
  return {input_dim,
          {{LayerSpec::Kind::dense, 64, 0.0},
           {LayerSpec::Kind::dense, 64, 0.0},
           {LayerSpec::Kind::dropout, 0, 0.5},
           {LayerSpec::Kind::dense, 32, 0.0}}};
}

ArchitectureSpec ArchitectureSpec::model3(int input_dim) {
  return {input_dim,
          {{LayerSpec::Kind::dense, 64, 0.0},
           {LayerSpec::Kind::dense, 64, 0.0}}};
}

ArchitectureSpec ArchitectureSpec::by_name(const std::string& name,
                                           int input_dim) {
  if (name == "model1") return model1(input_dim);
  if (name == "model2") return model2(input_dim);
  if (name == "model3") return model3(input_dim);
  throw std::invalid_argument("unknown architecture: " + name);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("TrainConfig: learning_rate must be positive");
  if (batch_size <= 0 || max_epochs <= 0 || patience < 0)
    throw std::invalid_argument("TrainConfig: invalid batch/epoch/patience");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) ||
      !(epsilon > 0.0))
    throw std::invalid_argument("TrainConfig: invalid ADAM constants");
}

NetworkModel init_network(const ArchitectureSpec& arch, std::uint64_t seed) {
  NetworkModel m;
  m.arch = arch;
  m.dims = dense_dims(arch);
  m.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
    const int in = m.dims[l], out = m.dims[l + 1];
    // Fan-in scaled uniform init, suited to ReLU.
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> u(-limit, limit);
    std::vector<double> W(static_cast<std::size_t>(in) * out);
    for (auto& w : W) w = u(rng);
    m.weights.push_back(std::move(W));
    m.biases.emplace_back(static_cast<std::size_t>(out), 0.0);
  }
  return m;
}

double forward(const NetworkModel& m, const std::vector<double>& features,
               ForwardMode mode, std::uint64_t mask_seed) {
  std::mt19937_64 rng(mask_seed);
  return forward_pass(m, features, mode,
                      mode == ForwardMode::train ? &rng : nullptr, nullptr);
}

std::pair<double, Gradients> loss_and_gradients(
    const NetworkModel& m, const std::vector<std::vector<double>>& features,
    const std::vector<double>& targets, const ScoreParams& p, ForwardMode mode,
    std::uint64_t mask_seed) {
  if (features.empty() || features.size() != targets.size())
    throw std::invalid_argument("loss_and_gradients: empty or ragged batch");
  Gradients g;
  for (const auto& W : m.weights) g.weights.emplace_back(W.size(), 0.0);
  for (const auto& b : m.biases) g.biases.emplace_back(b.size(), 0.0);

  std::mt19937_64 rng(mask_seed);
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    Workspace ws;
    const double pred = forward_pass(m, features[i], mode,
                                     mode == ForwardMode::train ? &rng : nullptr,
                                     &ws);
    total += huber_quantile_score(pred, targets[i], p);
    backward_pass(m, ws, score_subgradient(pred, targets[i], p), g);
  }
  const double inv_n = 1.0 / static_cast<double>(features.size());
  for (auto& W : g.weights)
    for (auto& v : W) v *= inv_n;
  for (auto& b : g.biases)
    for (auto& v : b) v *= inv_n;
  const double loss = total * inv_n;
  if (!std::isfinite(loss))
    throw std::runtime_error("loss_and_gradients: non-finite loss");
  return {loss, std::move(g)};
}

AdamState init_adam(const NetworkModel& m) {
  AdamState s;
  for (const auto& W : m.weights) {
    s.m_w.emplace_back(W.size(), 0.0);
    s.v_w.emplace_back(W.size(), 0.0);
  }
  for (const auto& b : m.biases) {
    s.m_b.emplace_back(b.size(), 0.0);
    s.v_b.emplace_back(b.size(), 0.0);
  }
  return s;
}

namespace {

void adam_update(std::vector<double>& w, const std::vector<double>& g,
                 std::vector<double>& m1, std::vector<double>& m2,
                 const TrainConfig& cfg, double bc1, double bc2) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * g[i];
    m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mhat = m1[i] / bc1;
    const double vhat = m2[i] / bc2;
    w[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

}  // namespace

void adam_step(NetworkModel& m, const Gradients& g, AdamState& state,
               const TrainConfig& cfg, long step) {
  if (step < 1) throw std::invalid_argument("adam_step: step index starts at 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    adam_update(m.weights[l], g.weights[l], state.m_w[l], state.v_w[l], cfg,
                bc1, bc2);
    adam_update(m.biases[l], g.biases[l], state.m_b[l], state.v_b[l], cfg, bc1,
                bc2);
  }
}

std::pair<NetworkModel, TrainReport> train_early_stopping(
    const std::vector<std::vector<double>>& train_x,
    const std::vector<double>& train_y,
    const std::vector<std::vector<double>>& val_x,
    const std::vector<double>& val_y, const ArchitectureSpec& arch,
    const ScoreParams& p, const TrainConfig& cfg) {
  cfg.validate();
  if (train_x.empty() || val_x.empty())
    throw std::invalid_argument("train_early_stopping: empty dataset");
  NetworkModel model = init_network(arch, cfg.seed);
  model.loss_params = p;
  EpochRunner runner(model, train_x, train_y, p, cfg);

  TrainReport report;
  NetworkModel best = model;
  double best_val = kInf;
  int wait = 0;
  const int stop_after = std::max(cfg.patience, 1);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    report.train_score.push_back(runner.run(epoch));
    const double val = mean_infer_score(model, val_x, val_y, p);
    report.val_score.push_back(val);
    report.stopped_at = epoch;
    if (val < best_val) {
      best_val = val;
      best = model;
      report.best_epoch = epoch;
      wait = 0;
    } else if (++wait >= stop_after) {
      break;
    }
  }
  return {std::move(best), std::move(report)};
}

NetworkModel refit_fixed_epochs(const std::vector<std::vector<double>>& x,
                                const std::vector<double>& y,
                                const ArchitectureSpec& arch,
                                const ScoreParams& p, const TrainConfig& cfg,
                                int epochs) {
  cfg.validate();
  if (epochs < 0) throw std::invalid_argument("refit_fixed_epochs: epochs < 0");
  if (x.empty()) throw std::invalid_argument("refit_fixed_epochs: empty dataset");
  NetworkModel model = init_network(arch, cfg.seed);
  model.loss_params = p;
  EpochRunner runner(model, x, y, p, cfg);
  for (int epoch = 1; epoch <= epochs; ++epoch) runner.run(epoch);
  return model;
}

std::vector<double> predict_batch(
    const NetworkModel& m, const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  const bool standardize = !m.norm_stats.mean.empty();
  if (standardize &&
      static_cast<int>(m.norm_stats.mean.size()) != m.arch.input_dim)
    throw std::invalid_argument("predict_batch: norm_stats dimension mismatch");
  for (const auto& row : rows) {
    std::vector<double> f = row;
    if (standardize)
      for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = (f[i] - m.norm_stats.mean[i]) / m.norm_stats.stddev[i];
    out.push_back(forward_pass(m, f, ForwardMode::infer, nullptr, nullptr));
  }
  return out;
}

namespace {

json cap_to_json(double c) {
  if (std::isinf(c)) return "inf";
  return c;
}

double cap_from_json(const json& j) {
  if (j.is_string()) return kInf;
  return j.get<double>();
}

}  // namespace

void save_model(const NetworkModel& m, const std::string& path) {
  json arch = json::array();
  for (const auto& l : m.arch.layers) {
    if (l.kind == LayerSpec::Kind::dense)
      arch.push_back({{"kind", "dense"}, {"units", l.units}});
    else
      arch.push_back({{"kind", "dropout"}, {"rate", l.rate}});
  }
  json j{{"input_dim", m.arch.input_dim},
         {"layers", arch},
         {"weights", m.weights},
         {"biases", m.biases},
         {"norm_mean", m.norm_stats.mean},
         {"norm_stddev", m.norm_stats.stddev},
         {"loss_params",
          {{"tau", m.loss_params.tau},
           {"a", cap_to_json(m.loss_params.a)},
           {"b", cap_to_json(m.loss_params.b)}}},
         {"seed", m.seed}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << j.dump(2) << '\n';
}

NetworkModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  json j = json::parse(in);
  ArchitectureSpec arch;
  arch.input_dim = j.at("input_dim").get<int>();
  for (const auto& l : j.at("layers")) {
    if (l.at("kind") == "dense")
      arch.layers.push_back({LayerSpec::Kind::dense, l.at("units").get<int>(), 0.0});
    else
      arch.layers.push_back(
          {LayerSpec::Kind::dropout, 0, l.at("rate").get<double>()});
  }
  NetworkModel m = init_network(arch, j.at("seed").get<std::uint64_t>());
  m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  m.norm_stats.mean = j.at("norm_mean").get<std::vector<double>>();
  m.norm_stats.stddev = j.at("norm_stddev").get<std::vector<double>>();
  const auto& lp = j.at("loss_params");
  m.loss_params = ScoreParams(lp.at("tau").get<double>(),
                              cap_from_json(lp.at("a")),
                              cap_from_json(lp.at("b")));
  return m;
}

}  // namespace dhqr
