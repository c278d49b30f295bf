#include "bcpnn/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bcpnn {

const char* activity_name(Activity a) {
  return a == Activity::kSpiking ? "spiking" : "rate";
}

Activity activity_from_name(const std::string& name) {
  if (name == "spiking") return Activity::kSpiking;
  if (name == "rate") return Activity::kRate;
  throw ConfigError("mode.activity must be 'spiking' or 'rate', got '" + name + "'");
}

void ExperimentConfig::validate() const {
  sim.validate();
  input_geom.validate();
  hidden_geom.validate();
  require_config(input_geom.n_minicolumns == 2,
                 "geometry.input_minicolumns must be 2 (complement coding)");
  require_config(p_conn > 0.0 && p_conn <= 1.0, "topology.p_conn must be in (0,1]");
  require_config(rewire_interval_patterns >= 1,
                 "topology.rewire_interval_patterns must be >= 1");
  require_config(swaps_per_event >= 0, "topology.swaps_per_event must be >= 0");
  protocol.validate(sim.dt_ms);
  require_config(engine.weight_refresh_steps >= 1,
                 "engine.weight_refresh_steps must be >= 1");
  classifier.validate();
  require_config(classifier_runs >= 1, "classifier.runs must be >= 1");
  require_config(subsample_train >= 0 && subsample_test >= 0,
                 "data.subsample_* must be >= 0");
  require_config(sweep_workers >= 0, "sweep.workers must be >= 0");
  for (double v : sweep_tau_z_grid)
    require_config(v > 0.0, "sweep.tau_z_grid values must be > 0");
  for (double v : sweep_f_max_grid)
    require_config(v > 0.0, "sweep.f_max_grid values must be > 0");
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  auto sim_eq = [](const SimParams& a, const SimParams& b) {
    return a.dt_ms == b.dt_ms && a.tau_z_ms == b.tau_z_ms && a.tau_p_ms == b.tau_p_ms &&
           a.f_max_hz == b.f_max_hz && a.eps == b.eps && a.seed == b.seed;
  };
  auto proto_eq = [](const ProtocolParams& a, const ProtocolParams& b) {
    return a.t_pat_ms == b.t_pat_ms && a.t_gap_ms == b.t_gap_ms &&
           a.n_epochs == b.n_epochs && a.n_patterns == b.n_patterns;
  };
  auto clf_eq = [](const ClassifierParams& a, const ClassifierParams& b) {
    return a.n_classes == b.n_classes && a.lr == b.lr && a.beta1 == b.beta1 &&
           a.beta2 == b.beta2 && a.adam_eps == b.adam_eps &&
           a.batch_size == b.batch_size && a.n_epochs == b.n_epochs && a.seed == b.seed;
  };
  return sim_eq(sim, o.sim) && input_geom == o.input_geom &&
         hidden_geom == o.hidden_geom && p_conn == o.p_conn &&
         rewire_interval_patterns == o.rewire_interval_patterns &&
         swaps_per_event == o.swaps_per_event && proto_eq(protocol, o.protocol) &&
         activity == o.activity &&
         engine.weight_refresh_steps == o.engine.weight_refresh_steps &&
         clf_eq(classifier, o.classifier) && classifier_runs == o.classifier_runs &&
         data == o.data && subsample_train == o.subsample_train &&
         subsample_test == o.subsample_test &&
         sweep_tau_z_grid == o.sweep_tau_z_grid &&
         sweep_f_max_grid == o.sweep_f_max_grid && sweep_workers == o.sweep_workers &&
         output_dir == o.output_dir;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long i = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" +
                      v + "'");
  }
}

std::vector<double> parse_grid(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::string format_grid(const std::vector<double>& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", grid[i]);
    if (i) out += ",";
    out += buf;
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"sim.dt_ms", [&](auto& k, auto& v) { c.sim.dt_ms = parse_double(k, v); }},
      {"sim.tau_z_ms", [&](auto& k, auto& v) { c.sim.tau_z_ms = parse_double(k, v); }},
      {"sim.tau_p_ms", [&](auto& k, auto& v) { c.sim.tau_p_ms = parse_double(k, v); }},
      {"sim.f_max_hz", [&](auto& k, auto& v) { c.sim.f_max_hz = parse_double(k, v); }},
      {"sim.eps", [&](auto& k, auto& v) { c.sim.eps = parse_double(k, v); }},
      {"sim.seed", [&](auto& k, auto& v) { c.sim.seed = parse_u64(k, v); }},
      {"geometry.input_hypercolumns",
       [&](auto& k, auto& v) { c.input_geom.n_hypercolumns = (int)parse_int(k, v); }},
      {"geometry.input_minicolumns",
       [&](auto& k, auto& v) { c.input_geom.n_minicolumns = (int)parse_int(k, v); }},
      {"geometry.hidden_hypercolumns",
       [&](auto& k, auto& v) { c.hidden_geom.n_hypercolumns = (int)parse_int(k, v); }},
      {"geometry.hidden_minicolumns",
       [&](auto& k, auto& v) { c.hidden_geom.n_minicolumns = (int)parse_int(k, v); }},
      {"topology.p_conn", [&](auto& k, auto& v) { c.p_conn = parse_double(k, v); }},
      {"topology.rewire_interval_patterns",
       [&](auto& k, auto& v) { c.rewire_interval_patterns = parse_int(k, v); }},
      {"topology.swaps_per_event",
       [&](auto& k, auto& v) { c.swaps_per_event = (int)parse_int(k, v); }},
      {"protocol.t_pat_ms",
       [&](auto& k, auto& v) { c.protocol.t_pat_ms = parse_double(k, v); }},
      {"protocol.t_gap_ms",
       [&](auto& k, auto& v) { c.protocol.t_gap_ms = parse_double(k, v); }},
      {"protocol.n_epochs",
       [&](auto& k, auto& v) { c.protocol.n_epochs = (int)parse_int(k, v); }},
      {"protocol.n_patterns",
       [&](auto& k, auto& v) { c.protocol.n_patterns = parse_int(k, v); }},
      {"mode.activity", [&](auto&, auto& v) { c.activity = activity_from_name(v); }},
      {"engine.weight_refresh_steps",
       [&](auto& k, auto& v) { c.engine.weight_refresh_steps = (int)parse_int(k, v); }},
      {"classifier.n_classes",
       [&](auto& k, auto& v) { c.classifier.n_classes = (int)parse_int(k, v); }},
      {"classifier.lr", [&](auto& k, auto& v) { c.classifier.lr = parse_double(k, v); }},
      {"classifier.beta1",
       [&](auto& k, auto& v) { c.classifier.beta1 = parse_double(k, v); }},
      {"classifier.beta2",
       [&](auto& k, auto& v) { c.classifier.beta2 = parse_double(k, v); }},
      {"classifier.adam_eps",
       [&](auto& k, auto& v) { c.classifier.adam_eps = parse_double(k, v); }},
      {"classifier.batch_size",
       [&](auto& k, auto& v) { c.classifier.batch_size = (int)parse_int(k, v); }},
      {"classifier.n_epochs",
       [&](auto& k, auto& v) { c.classifier.n_epochs = (int)parse_int(k, v); }},
      {"classifier.runs",
       [&](auto& k, auto& v) { c.classifier_runs = (int)parse_int(k, v); }},
      {"data.train_images", [&](auto&, auto& v) { c.data.train_images = v; }},
      {"data.train_labels", [&](auto&, auto& v) { c.data.train_labels = v; }},
      {"data.test_images", [&](auto&, auto& v) { c.data.test_images = v; }},
      {"data.test_labels", [&](auto&, auto& v) { c.data.test_labels = v; }},
      {"data.subsample_train",
       [&](auto& k, auto& v) { c.subsample_train = parse_int(k, v); }},
      {"data.subsample_test",
       [&](auto& k, auto& v) { c.subsample_test = parse_int(k, v); }},
      {"sweep.tau_z_grid",
       [&](auto& k, auto& v) { c.sweep_tau_z_grid = parse_grid(k, v); }},
      {"sweep.f_max_grid",
       [&](auto& k, auto& v) { c.sweep_f_max_grid = parse_grid(k, v); }},
      {"sweep.workers", [&](auto& k, auto& v) { c.sweep_workers = (int)parse_int(k, v); }},
      {"output.dir", [&](auto&, auto& v) { c.output_dir = v; }},
  };

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("unknown config key '" + key + "' (line " +
                        std::to_string(lineno) + ")");
    it->second(key, value);
  }
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  char buf[256];
  auto putd = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
    os << buf;
  };
  auto puti = [&](const char* key, long long v) {
    std::snprintf(buf, sizeof buf, "%s = %lld\n", key, v);
    os << buf;
  };
  auto puts = [&](const char* key, const std::string& v) {
    os << key << " = " << v << '\n';
  };
  putd("sim.dt_ms", c.sim.dt_ms);
  putd("sim.tau_z_ms", c.sim.tau_z_ms);
  putd("sim.tau_p_ms", c.sim.tau_p_ms);
  putd("sim.f_max_hz", c.sim.f_max_hz);
  putd("sim.eps", c.sim.eps);
  puti("sim.seed", static_cast<long long>(c.sim.seed));
  puti("geometry.input_hypercolumns", c.input_geom.n_hypercolumns);
  puti("geometry.input_minicolumns", c.input_geom.n_minicolumns);
  puti("geometry.hidden_hypercolumns", c.hidden_geom.n_hypercolumns);
  puti("geometry.hidden_minicolumns", c.hidden_geom.n_minicolumns);
  putd("topology.p_conn", c.p_conn);
  puti("topology.rewire_interval_patterns", c.rewire_interval_patterns);
  puti("topology.swaps_per_event", c.swaps_per_event);
  putd("protocol.t_pat_ms", c.protocol.t_pat_ms);
  putd("protocol.t_gap_ms", c.protocol.t_gap_ms);
  puti("protocol.n_epochs", c.protocol.n_epochs);
  puti("protocol.n_patterns", c.protocol.n_patterns);
  puts("mode.activity", activity_name(c.activity));
  puti("engine.weight_refresh_steps", c.engine.weight_refresh_steps);
  puti("classifier.n_classes", c.classifier.n_classes);
  putd("classifier.lr", c.classifier.lr);
  putd("classifier.beta1", c.classifier.beta1);
  putd("classifier.beta2", c.classifier.beta2);
  putd("classifier.adam_eps", c.classifier.adam_eps);
  puti("classifier.batch_size", c.classifier.batch_size);
  puti("classifier.n_epochs", c.classifier.n_epochs);
  puti("classifier.runs", c.classifier_runs);
  puts("data.train_images", c.data.train_images);
  puts("data.train_labels", c.data.train_labels);
  puts("data.test_images", c.data.test_images);
  puts("data.test_labels", c.data.test_labels);
  puti("data.subsample_train", c.subsample_train);
  puti("data.subsample_test", c.subsample_test);
  puts("sweep.tau_z_grid", format_grid(c.sweep_tau_z_grid));
  puts("sweep.f_max_grid", format_grid(c.sweep_f_max_grid));
  puti("sweep.workers", c.sweep_workers);
  puts("output.dir", c.output_dir);
  return os.str();
}

}  // namespace bcpnn
