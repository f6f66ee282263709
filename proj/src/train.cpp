#include "cwb/train.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include <json.hpp>

#include "cwb/config.hpp"
#include "cwb/io.hpp"
#include "cwb/rng.hpp"

namespace cwb {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload format assumes a little-endian host");

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
  if (!(validation_fraction > 0.0) || !(validation_fraction < 1.0))
    throw ConfigError("train: validation_fraction must lie in (0, 1)");
  if (!(grad_clip_norm > 0.0))
    throw ConfigError("train: grad_clip_norm must be positive");
  model.validate();
  if (!mixture.empty()) {
    double sum = 0.0;
    for (const auto& [cls, ratio] : mixture) {
      if (ratio < 0.0) throw ConfigError("train: mixture ratio negative for " + cls);
      sum += ratio;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("train: mixture ratios must sum to 1");
  }
}

void adam_step(ad::ParamMap& params, const ad::ParamMap& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (state.t == 0) {
    for (const auto& [name, value] : params) {
      state.m[name] = Matrix::Zero(value.rows(), value.cols());
      state.v[name] = Matrix::Zero(value.rows(), value.cols());
    }
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (auto& [name, value] : params) {
    auto it = grads.find(name);
    require(it != grads.end(), "adam_step: missing gradient for " + name);
    const Matrix& g = it->second;
    require(g.rows() == value.rows() && g.cols() == value.cols(),
            "adam_step: gradient shape mismatch for " + name);
    if (!g.allFinite())
      throw NumericError("adam_step: non-finite gradient for " + name +
                         " (training divergence)");
    Matrix& m = state.m[name];
    Matrix& v = state.v[name];
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    Matrix m_hat = m / bc1;
    Matrix v_hat = v / bc2;
    value.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + eps);
  }
}

namespace {

double global_grad_norm(const ad::ParamMap& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += g.squaredNorm();
  return std::sqrt(sq);
}

}  // namespace

Checkpoint train_model(const TrainConfig& config, const std::vector<Dataset>& corpus,
                       int workers) {
  config.validate();
  require(!corpus.empty(), "train: corpus is empty");
  require(corpus.size() >= 2, "train: corpus needs at least 2 datasets for the validation split");

  // Deterministic validation split.
  const int n = static_cast<int>(corpus.size());
  int n_val = static_cast<int>(std::lround(config.validation_fraction * n));
  n_val = std::clamp(n_val, 1, n - 1);
  RngStream master(config.seed);
  std::vector<int> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  {
    RngStream shuffle = master.fork(0);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle.next_u64() % i]);
  }
  std::vector<int> val_idx(order.begin(), order.begin() + n_val);
  std::vector<int> train_idx(order.begin() + n_val, order.end());

  Parameters params = Parameters::init(config.model, master.fork(1).seed());
  AdamState adam;

  Checkpoint best;
  best.config = config;
  best.model_id = config.name + ":seed" + std::to_string(config.seed);
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_without_improvement = 0;

  std::vector<double> batch_nll(static_cast<std::size_t>(config.batch_size));
  std::vector<ad::ParamMap> batch_grads(static_cast<std::size_t>(config.batch_size));

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    // Without-replacement pass in a per-epoch shuffled order.
    std::vector<int> epoch_order = train_idx;
    {
      RngStream shuffle = master.fork(1000 + epoch);
      for (std::size_t i = epoch_order.size(); i > 1; --i)
        std::swap(epoch_order[i - 1], epoch_order[shuffle.next_u64() % i]);
    }

    double train_nll_sum = 0.0;
    for (std::size_t start = 0; start < epoch_order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t members = std::min(
          static_cast<std::size_t>(config.batch_size), epoch_order.size() - start);
      parallel_for(members, workers, [&](std::size_t b) {
        GradResult r =
            nll_and_gradients(params, corpus[static_cast<std::size_t>(
                                          epoch_order[start + b])]);
        batch_nll[b] = r.nll;
        batch_grads[b] = std::move(r.grads);
      });
      // Fixed-order reduction keeps the update identical for any worker count.
      ad::ParamMap grads = std::move(batch_grads[0]);
      for (std::size_t b = 1; b < members; ++b)
        for (auto& [name, g] : grads) g += batch_grads[b].at(name);
      const double inv = 1.0 / static_cast<double>(members);
      for (auto& [name, g] : grads) g *= inv;
      for (std::size_t b = 0; b < members; ++b) {
        if (!std::isfinite(batch_nll[b]))
          throw NumericError("train: loss diverged at epoch " + std::to_string(epoch));
        train_nll_sum += batch_nll[b];
      }

      double norm = global_grad_norm(grads);
      if (norm > config.grad_clip_norm) {
        const double s = config.grad_clip_norm / norm;
        for (auto& [name, g] : grads) g *= s;
      }
      adam_step(params.weights, grads, adam, config.learning_rate);
    }

    double val_nll_sum = 0.0;
    std::vector<double> val_nll(val_idx.size());
    parallel_for(val_idx.size(), workers, [&](std::size_t i) {
      val_nll[i] = dataset_nll(params, corpus[static_cast<std::size_t>(val_idx[i])]);
    });
    for (double v : val_nll) val_nll_sum += v;
    double val_mean = val_nll_sum / static_cast<double>(val_idx.size());
    if (!std::isfinite(val_mean))
      throw NumericError("train: validation loss diverged at epoch " +
                         std::to_string(epoch));

    best.curve.push_back({epoch,
                          train_nll_sum / static_cast<double>(train_idx.size()),
                          val_mean});

    if (val_mean < best_val) {
      best_val = val_mean;
      best.best_epoch = epoch;
      best.params = params;
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
      if (epochs_without_improvement >= config.patience) break;
    }
  }
  return best;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json manifest = json::array();
  std::size_t offset = 0;
  for (const auto& [name, value] : ckpt.params.weights) {
    manifest.push_back({{"name", name},
                        {"rows", value.rows()},
                        {"cols", value.cols()},
                        {"offset", offset}});
    offset += static_cast<std::size_t>(value.size()) * sizeof(double);
  }
  json curve = json::array();
  for (const EpochStats& e : ckpt.curve)
    curve.push_back({e.epoch, e.train_nll, e.val_nll});
  json header = {{"format", "CWBCKPT1"},
                 {"model", to_json(ckpt.params.config)},
                 {"train", to_json(ckpt.config)},
                 {"curve", curve},
                 {"best_epoch", ckpt.best_epoch},
                 {"model_id", ckpt.model_id},
                 {"params", manifest},
                 {"payload_bytes", offset}};
  std::string head = header.dump();
  std::string out = "CWBCKPT1 " + std::to_string(head.size()) + "\n" + head;
  out.reserve(out.size() + offset);
  for (const auto& [name, value] : ckpt.params.weights) {
    // Eigen stores column-major; serialize row-major for a layout-free format.
    for (Index i = 0; i < value.rows(); ++i) {
      for (Index j = 0; j < value.cols(); ++j) {
        double v = value(i, j);
        char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        out.append(bytes, sizeof(double));
      }
    }
  }
  write_text_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::string blob = read_text_file(path);
  if (blob.rfind("CWBCKPT1 ", 0) != 0)
    throw IoError("checkpoint " + path + ": bad magic (expected CWBCKPT1)");
  std::size_t nl = blob.find('\n');
  if (nl == std::string::npos) throw IoError("checkpoint " + path + ": truncated header");
  std::size_t head_len = 0;
  try {
    head_len = std::stoul(blob.substr(9, nl - 9));
  } catch (const std::exception&) {
    throw IoError("checkpoint " + path + ": malformed header length");
  }
  if (blob.size() < nl + 1 + head_len)
    throw IoError("checkpoint " + path + ": truncated header");
  json header;
  try {
    header = json::parse(blob.substr(nl + 1, head_len));
  } catch (const json::exception& e) {
    throw IoError("checkpoint " + path + ": header parse: " + e.what());
  }

  Checkpoint ckpt;
  try {
    ckpt.params.config = model_config_from_json(header.at("model"), "checkpoint.model");
    ckpt.config = train_config_from_json(header.at("train"), "checkpoint.train");
    for (const auto& e : header.at("curve"))
      ckpt.curve.push_back(
          {e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>()});
    ckpt.best_epoch = header.at("best_epoch").get<int>();
    ckpt.model_id = header.at("model_id").get<std::string>();

    const std::string payload = blob.substr(nl + 1 + head_len);
    const std::size_t expected = header.at("payload_bytes").get<std::size_t>();
    if (payload.size() != expected)
      throw IoError("checkpoint " + path + ": payload is " +
                    std::to_string(payload.size()) + " bytes, header declares " +
                    std::to_string(expected));
    for (const auto& entry : header.at("params")) {
      std::string name = entry.at("name").get<std::string>();
      Index rows = entry.at("rows").get<Index>();
      Index cols = entry.at("cols").get<Index>();
      std::size_t offset = entry.at("offset").get<std::size_t>();
      std::size_t bytes = static_cast<std::size_t>(rows * cols) * sizeof(double);
      if (offset + bytes > payload.size())
        throw IoError("checkpoint " + path + ": parameter " + name +
                      " exceeds payload");
      Matrix m(rows, cols);
      const char* src = payload.data() + offset;
      for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
          double v;
          std::memcpy(&v, src, sizeof(double));
          src += sizeof(double);
          m(i, j) = v;
        }
      }
      ckpt.params.weights.emplace(std::move(name), std::move(m));
    }
  } catch (const json::exception& e) {
    throw IoError("checkpoint " + path + ": header field: " + e.what());
  }
  return ckpt;
}

void write_curve_csv(const std::string& path, const Checkpoint& ckpt) {
  std::string out = "# grad_clip_norm=" + format_double(ckpt.config.grad_clip_norm) +
                    "\n# best_epoch=" + std::to_string(ckpt.best_epoch) +
                    "\nepoch,train_nll,val_nll\n";
  for (const EpochStats& e : ckpt.curve) {
    out += std::to_string(e.epoch);
    out += ',';
    out += format_double(e.train_nll);
    out += ',';
    out += format_double(e.val_nll);
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace cwb
