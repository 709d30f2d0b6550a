#include "mpfmfd/forecasters.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>

#include "mpfmfd/error.hpp"

namespace mpfmfd {
namespace {

using Json = nlohmann::ordered_json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ChannelStats channel_stats(const std::vector<Record>& records, Channel channel) {
  const double n = static_cast<double>(records.size());
  double mean = 0.0;
  for (const Record& r : records) mean += channel == Channel::C ? r.c : r.g;
  mean /= n;
  double ss = 0.0;
  for (const Record& r : records) {
    const double d = (channel == Channel::C ? r.c : r.g) - mean;
    ss += d * d;
  }
  double sd = std::sqrt(ss / n);
  if (!(sd > 0.0) || !std::isfinite(sd)) sd = 1.0;
  return {mean, sd};
}

const TcnKind& expect_tcn(const TrainedModel& model) {
  const auto* tcn = std::get_if<TcnKind>(&model.kind);
  if (tcn == nullptr) fail(ErrorCode::ModelKindMismatch, "model is " + kind_label(model.kind) + ", not a TCN");
  return *tcn;
}

Channel input_channel(TcnMode mode) { return mode == TcnMode::Exogenous ? Channel::C : Channel::G; }

const ChannelStats& stats_for(const Normalization& norm, Channel channel) {
  return channel == Channel::C ? norm.c : norm.g;
}

std::string hex_double(double v) {
  char buf[64];
  char* p = buf;
  if (std::signbit(v)) *p++ = '-';
  *p++ = '0';
  *p++ = 'x';
  auto [end, ec] = std::to_chars(p, buf + sizeof buf, std::abs(v), std::chars_format::hex);
  (void)ec;
  return std::string(buf, end);
}

double parse_hex_double(const Json& node) {
  if (!node.is_string()) fail(ErrorCode::CorruptFile, "expected hex float string");
  std::string_view text = node.get_ref<const std::string&>();
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  if (text.substr(0, 2) != "0x") fail(ErrorCode::CorruptFile, "malformed hex float '" + std::string(text) + "'");
  text.remove_prefix(2);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, std::chars_format::hex);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::CorruptFile, "malformed hex float '" + std::string(text) + "'");
  }
  return negative ? -v : v;
}

Json hex_array(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(hex_double(v));
  return out;
}

std::vector<double> parse_hex_array(const Json& node) {
  if (!node.is_array()) fail(ErrorCode::CorruptFile, "expected array");
  std::vector<double> out;
  out.reserve(node.size());
  for (const Json& item : node) out.push_back(parse_hex_double(item));
  return out;
}

Json kind_to_json(const ForecasterKind& kind) {
  return std::visit(Overloaded{
                        [](const NaiveKind&) { return Json{{"type", "naive"}}; },
                        [](const HardSubtractionKind& k) { return Json{{"type", "hard_subtraction"}, {"lag_m", k.lag_m}}; },
                        [](const TcnKind& k) {
                          const TcnConfig& c = k.config;
                          return Json{{"type", "tcn"},
                                      {"mode", k.mode == TcnMode::Exogenous ? "exogenous" : "endogenous"},
                                      {"input_window_n", c.input_window_n},
                                      {"channels", c.channels},
                                      {"kernel_size", c.kernel_size},
                                      {"num_blocks", c.num_blocks},
                                      {"learning_rate", hex_double(c.learning_rate)},
                                      {"epochs", c.epochs},
                                      {"batch_size", c.batch_size},
                                      {"seed", c.seed},
                                      {"dropout_rate", hex_double(c.dropout_rate)}};
                        },
                    },
                    kind);
}

ForecasterKind kind_from_json(const Json& node) {
  const std::string type = node.at("type").get<std::string>();
  if (type == "naive") return NaiveKind{};
  if (type == "hard_subtraction") return HardSubtractionKind{node.at("lag_m").get<Index>()};
  if (type != "tcn") fail(ErrorCode::CorruptFile, "unknown forecaster type '" + type + "'");
  TcnKind kind;
  const std::string mode = node.at("mode").get<std::string>();
  if (mode == "exogenous") {
    kind.mode = TcnMode::Exogenous;
  } else if (mode == "endogenous") {
    kind.mode = TcnMode::Endogenous;
  } else {
    fail(ErrorCode::CorruptFile, "unknown tcn mode '" + mode + "'");
  }
  TcnConfig& c = kind.config;
  c.input_window_n = node.at("input_window_n").get<int>();
  c.channels = node.at("channels").get<int>();
  c.kernel_size = node.at("kernel_size").get<int>();
  c.num_blocks = node.at("num_blocks").get<int>();
  c.learning_rate = parse_hex_double(node.at("learning_rate"));
  c.epochs = node.at("epochs").get<int>();
  c.batch_size = node.at("batch_size").get<int>();
  c.seed = node.at("seed").get<std::uint64_t>();
  c.dropout_rate = parse_hex_double(node.at("dropout_rate"));
  return kind;
}

std::size_t expected_parameter_count(const ForecasterKind& kind) {
  if (const auto* tcn = std::get_if<TcnKind>(&kind)) return TcnArchitecture(tcn->config).parameter_count();
  return 0;
}

}  // namespace

std::string kind_label(const ForecasterKind& kind) {
  return std::visit(Overloaded{
                        [](const NaiveKind&) { return std::string("naive"); },
                        [](const HardSubtractionKind&) { return std::string("hardsub"); },
                        [](const TcnKind& k) {
                          return std::string(k.mode == TcnMode::Exogenous ? "tcn-exo" : "tcn-endo");
                        },
                    },
                    kind);
}

Normalization fit_normalization(const SeriesPair& train) {
  return {channel_stats(train.records(), Channel::C), channel_stats(train.records(), Channel::G)};
}

double naive_forecast(std::span<const double> history) {
  if (history.empty()) fail(ErrorCode::EmptyHistory, "naive forecast needs at least one value");
  return history.back();
}

Index estimate_lag(const SeriesPair& pair, Index max_lag) {
  if (max_lag < 0) fail(ErrorCode::InvalidConfig, "max_lag must be >= 0");
  const auto n = static_cast<Index>(pair.size());
  if (n <= 2 * max_lag) {
    fail(ErrorCode::SeriesTooShort, "series of length " + std::to_string(n) + " too short for max_lag " +
                                        std::to_string(max_lag));
  }
  const auto& rec = pair.records();
  Index best_lag = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (Index lag = 0; lag <= max_lag; ++lag) {
    // Pairs (c[i - lag], g[i]) for i in [lag, n).
    const double count = static_cast<double>(n - lag);
    double mean_c = 0.0;
    double mean_g = 0.0;
    for (Index i = lag; i < n; ++i) {
      mean_c += rec[static_cast<std::size_t>(i - lag)].c;
      mean_g += rec[static_cast<std::size_t>(i)].g;
    }
    mean_c /= count;
    mean_g /= count;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (Index i = lag; i < n; ++i) {
      const double dx = rec[static_cast<std::size_t>(i - lag)].c - mean_c;
      const double dy = rec[static_cast<std::size_t>(i)].g - mean_g;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    const double denom = std::sqrt(sxx * syy);
    const double corr = denom > 0.0 ? sxy / denom : 0.0;
    if (corr > best) {
      best = corr;
      best_lag = lag;
    }
  }
  return best_lag;
}

double hard_subtraction_forecast(const SeriesPair& pair, Index t, Index lag_m) {
  const Index source = t + 1 - lag_m;
  if (lag_m < 0 || !pair.range().contains(source)) {
    fail(ErrorCode::OutOfRange, "c(" + std::to_string(source) + ") not available for t = " + std::to_string(t));
  }
  return pair.at(source).c;
}

double tcn_forward(const TrainedModel& model, std::span<const double> input_window) {
  const TcnKind& kind = expect_tcn(model);
  const TcnArchitecture arch(kind.config);
  if (input_window.size() != static_cast<std::size_t>(arch.window_length())) {
    fail(ErrorCode::WrongWindowLength, "expected " + std::to_string(arch.window_length()) + " values, got " +
                                           std::to_string(input_window.size()));
  }
  const ChannelStats& in = stats_for(model.normalization, input_channel(kind.mode));
  std::vector<double> z(input_window.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (input_window[i] - in.mean) / in.sd;
  const double y = arch.forward(model.parameters, z);
  return y * model.normalization.g.sd + model.normalization.g.mean;
}

TrainedModel tcn_train(const SeriesPair& train, const TcnKind& kind) {
  const TcnArchitecture arch(kind.config);
  const auto n = static_cast<std::size_t>(kind.config.input_window_n);
  const auto length = n + 1;
  if (train.size() < length + 1) {
    fail(ErrorCode::SeriesTooShort, "training series needs at least " + std::to_string(length + 1) + " samples");
  }
  TrainedModel model;
  model.kind = kind;
  model.normalization = fit_normalization(train);
  const Channel in_channel = input_channel(kind.mode);
  const ChannelStats& in = stats_for(model.normalization, in_channel);
  const ChannelStats& out = model.normalization.g;

  const auto& rec = train.records();
  TrainingExamples examples;
  examples.count = rec.size() - length;
  examples.inputs.reserve(examples.count * length);
  examples.targets.reserve(examples.count);
  // Target g[j] from inputs x[j-1-n .. j-1].
  for (std::size_t j = length; j < rec.size(); ++j) {
    for (std::size_t i = j - length; i < j; ++i) {
      const double x = in_channel == Channel::C ? rec[i].c : rec[i].g;
      examples.inputs.push_back((x - in.mean) / in.sd);
    }
    examples.targets.push_back((rec[j].g - out.mean) / out.sd);
  }

  TrainingResult result = train_tcn(arch, examples);
  model.parameters = std::move(result.parameters);
  model.training_loss_history = std::move(result.loss_history);
  return model;
}

TrainedModel fit_model(const SeriesPair& train, const ForecasterKind& kind) {
  if (const auto* tcn = std::get_if<TcnKind>(&kind)) return tcn_train(train, *tcn);
  if (const auto* hs = std::get_if<HardSubtractionKind>(&kind); hs != nullptr && hs->lag_m < 0) {
    fail(ErrorCode::InvalidConfig, "hard subtraction lag must be >= 0");
  }
  TrainedModel model;
  model.kind = kind;
  model.normalization = fit_normalization(train);
  return model;
}

IndexRange feasible_range(const TrainedModel& model, const SeriesPair& pair) {
  const IndexRange r = pair.range();
  const Index offset = std::visit(Overloaded{
                                      [](const NaiveKind&) { return Index{1}; },
                                      [](const HardSubtractionKind& k) { return std::max<Index>(1, k.lag_m); },
                                      [](const TcnKind& k) { return Index{k.config.input_window_n} + 1; },
                                  },
                                  model.kind);
  return {r.begin + offset, r.end};
}

IndexedSeries forecast_series(const TrainedModel& model, const SeriesPair& pair) {
  return forecast_series(model, pair, pair.range());
}

IndexedSeries forecast_series(const TrainedModel& model, const SeriesPair& pair, IndexRange range) {
  const IndexRange feasible = intersect(feasible_range(model, pair), range);
  if (feasible.empty()) fail(ErrorCode::SeriesTooShort, "series too short for a single forecast");
  IndexedSeries out;
  out.start = feasible.begin;
  out.values.resize(static_cast<std::size_t>(feasible.size()));

  if (std::holds_alternative<NaiveKind>(model.kind)) {
    for (Index t1 = feasible.begin; t1 < feasible.end; ++t1) {
      out.values[static_cast<std::size_t>(t1 - feasible.begin)] = pair.at(t1 - 1).g;
    }
  } else if (const auto* hs = std::get_if<HardSubtractionKind>(&model.kind)) {
    for (Index t1 = feasible.begin; t1 < feasible.end; ++t1) {
      out.values[static_cast<std::size_t>(t1 - feasible.begin)] = hard_subtraction_forecast(pair, t1 - 1, hs->lag_m);
    }
  } else {
    const TcnKind& kind = std::get<TcnKind>(model.kind);
    const TcnArchitecture arch(kind.config);
    const Channel channel = input_channel(kind.mode);
    const ChannelStats& in = stats_for(model.normalization, channel);
    const auto length = static_cast<std::size_t>(arch.window_length());
    const IndexedSeries x = pair.channel(channel);
    // The forecast for index feasible.begin + k reads x at
    // feasible.begin + k - 1 - n .. feasible.begin + k - 1.
    const auto first = static_cast<std::size_t>(feasible.begin - 1 - kind.config.input_window_n - x.start);
    std::vector<double> z(out.values.size() + length - 1);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (x.values[first + i] - in.mean) / in.sd;
    std::vector<double> inputs(out.values.size() * length);
    for (std::size_t k = 0; k < out.values.size(); ++k) {
      std::copy_n(z.begin() + static_cast<std::ptrdiff_t>(k), length,
                  inputs.begin() + static_cast<std::ptrdiff_t>(k * length));
    }
    arch.forward_batch(model.parameters, inputs, out.values);
    for (double& v : out.values) v = v * model.normalization.g.sd + model.normalization.g.mean;
  }
  return out;
}

std::string format_model(const TrainedModel& model) {
  Json doc;
  doc["format"] = "mpfmfd-model";
  doc["format_version"] = model.format_version;
  doc["kind"] = kind_to_json(model.kind);
  doc["normalization"] = {
      {"c", {{"mean", hex_double(model.normalization.c.mean)}, {"sd", hex_double(model.normalization.c.sd)}}},
      {"g", {{"mean", hex_double(model.normalization.g.mean)}, {"sd", hex_double(model.normalization.g.sd)}}},
  };
  doc["parameter_count"] = model.parameters.size();
  doc["parameters"] = hex_array(model.parameters);
  doc["training_loss_history"] = hex_array(model.training_loss_history);
  return doc.dump(1) + "\n";
}

TrainedModel parse_model(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorCode::CorruptFile, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", std::string()) != "mpfmfd-model") {
      fail(ErrorCode::CorruptFile, "not an mpfmfd model file");
    }
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      fail(ErrorCode::VersionMismatch, "model format_version " + std::to_string(version) + ", expected " +
                                           std::to_string(kModelFormatVersion));
    }
    TrainedModel model;
    model.format_version = version;
    model.kind = kind_from_json(doc.at("kind"));
    const Json& norm = doc.at("normalization");
    model.normalization.c = {parse_hex_double(norm.at("c").at("mean")), parse_hex_double(norm.at("c").at("sd"))};
    model.normalization.g = {parse_hex_double(norm.at("g").at("mean")), parse_hex_double(norm.at("g").at("sd"))};
    if (!(model.normalization.c.sd > 0.0) || !(model.normalization.g.sd > 0.0)) {
      fail(ErrorCode::CorruptFile, "normalization sd must be positive");
    }
    model.parameters = parse_hex_array(doc.at("parameters"));
    model.training_loss_history = parse_hex_array(doc.at("training_loss_history"));
    if (model.parameters.size() != doc.at("parameter_count").get<std::size_t>() ||
        model.parameters.size() != expected_parameter_count(model.kind)) {
      fail(ErrorCode::CorruptFile, "parameter count does not match the architecture");
    }
    return model;
  } catch (const Json::exception& e) {
    fail(ErrorCode::CorruptFile, std::string("model file is incomplete: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) fail(ErrorCode::CorruptFile, e.what());
    throw;
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_text_file(path, format_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

}  // namespace mpfmfd
