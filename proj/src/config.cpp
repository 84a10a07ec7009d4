#include "loco/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <Eigen/Dense>

#include "loco/edit.hpp"
#include "loco/harness.hpp"
#include "loco/molrg.hpp"
#include "loco/pmp.hpp"
#include "loco/sampler.hpp"
#include "loco/spectral.hpp"

namespace loco {

namespace {

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int out = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw UsageError("invalid integer for --" + key + ": '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long out = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw UsageError("invalid seed for --" + key + ": '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw UsageError("invalid number for --" + key + ": '" + value + "'");
  }
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value,
                          Parse parse) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse(key, item));
  if (out.empty())
    throw UsageError("empty list for --" + key + ": '" + value + "'");
  return out;
}

void apply_key(RunConfig& config, const std::string& key,
               const std::string& value) {
  if (key == "schedule") {
    try {
      config.schedule = schedule_kind_from_string(value);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--schedule: ") + e.what());
    }
  } else if (key == "dim") {
    config.dim = parse_int(key, value);
  } else if (key == "ranks") {
    config.ranks = parse_list<int>(key, value, parse_int);
  } else if (key == "model-file") {
    config.model_file = value;
  } else if (key == "seed") {
    config.seed = parse_u64(key, value);
  } else if (key == "t-grid") {
    config.t_grid = parse_list<double>(key, value, parse_double);
  } else if (key == "lambda-grid") {
    config.lambda_grid = parse_list<double>(key, value, parse_double);
  } else if (key == "eta") {
    config.eta = parse_double(key, value);
  } else if (key == "r") {
    config.r = parse_int(key, value);
  } else if (key == "r-null") {
    config.r_null = parse_int(key, value);
  } else if (key == "pick") {
    config.pick = parse_int(key, value);
  } else if (key == "steps") {
    config.steps = parse_int(key, value);
  } else if (key == "t") {
    config.t = parse_double(key, value);
  } else if (key == "t-mid") {
    config.t_mid = parse_double(key, value);
  } else if (key == "lambda") {
    config.lambda = parse_double(key, value);
  } else if (key == "mask") {
    config.mask = parse_list<int>(key, value, parse_int);
  } else if (key == "samples") {
    config.n_samples = parse_int(key, value);
  } else if (key == "grid") {
    if (value == "uniform") {
      config.grid = GridKind::kUniform;
    } else if (value == "quadratic") {
      config.grid = GridKind::kQuadratic;
    } else {
      throw UsageError("--grid: expected 'uniform' or 'quadratic', got '" +
                       value + "'");
    }
  } else if (key == "out-dir") {
    config.out_dir = value;
  } else if (key == "out") {
    config.out = value;
  } else {
    throw UsageError("unknown option --" + key);
  }
}

void validate(const RunConfig& config) {
  if (!(config.eta > 0.0 && config.eta < 1.0))
    throw UsageError("--eta must lie in (0, 1)");
  if (config.dim < 1) throw UsageError("--dim must be >= 1");
  int total = 0;
  for (int r : config.ranks) {
    if (r < 1) throw UsageError("--ranks entries must be >= 1");
    total += r;
  }
  if (config.model_file.empty() && total > config.dim)
    throw UsageError("--ranks sum exceeds --dim");
  if (config.r < 1) throw UsageError("--r must be >= 1");
  if (config.r_null < 1) throw UsageError("--r-null must be >= 1");
  if (config.pick < 1 || config.pick > config.r)
    throw UsageError("--pick must lie in [1, r]");
  if (config.steps < 1) throw UsageError("--steps must be >= 1");
  if (!(config.t > 0.0 && config.t < 1.0))
    throw UsageError("--t must lie in (0, 1)");
  if (!(config.t_mid >= 0.0 && config.t_mid < 1.0))
    throw UsageError("--t-mid must lie in [0, 1)");
  if (config.n_samples < 1) throw UsageError("--samples must be >= 1");
  for (double t : config.t_grid)
    if (!(t > 0.0 && t < 1.0))
      throw UsageError("--t-grid entries must lie in (0, 1)");
  for (double l : config.lambda_grid)
    if (!(l > 0.0)) throw UsageError("--lambda-grid entries must be positive");
  for (int i : config.mask)
    if (i < 0) throw UsageError("--mask indices must be nonnegative");
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args,
                       const std::optional<std::string>& config_file) {
  RunConfig config;

  if (const char* env = std::getenv("LOCO_THREADS")) {
    const int threads = parse_int("LOCO_THREADS", env);
    if (threads < 0) throw UsageError("LOCO_THREADS must be >= 0");
    config.threads = threads;
  }

  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw UsageError("cannot read config file " + *config_file);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      const auto eq = line.find('=');
      auto trim = [](std::string s) {
        const auto from = s.find_first_not_of(" \t\r");
        const auto to = s.find_last_not_of(" \t\r");
        return from == std::string::npos ? std::string()
                                         : s.substr(from, to - from + 1);
      };
      if (trim(line).empty()) continue;
      if (eq == std::string::npos)
        throw UsageError("config line " + std::to_string(line_no) +
                         ": expected 'key = value'");
      apply_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg.rfind("--", 0) != 0)
      throw UsageError("expected a --flag, got '" + arg + "'");
    if (i + 1 >= args.size())
      throw UsageError("missing value for " + arg);
    apply_key(config, arg.substr(2), args[++i]);
  }

  validate(config);
  return config;
}

namespace {

SubspaceModel make_model(const RunConfig& config) {
  if (!config.model_file.empty()) {
    if (!std::filesystem::exists(config.model_file))
      throw UsageError("model file not found: " + config.model_file);
    try {
      return SubspaceModel::load(config.model_file);
    } catch (const std::exception& e) {
      throw UsageError(std::string("cannot load model file: ") + e.what());
    }
  }
  return SubspaceModel::random(config.dim, config.ranks, config.seed);
}

std::string model_label(const RunConfig& config) {
  if (!config.model_file.empty()) return config.model_file;
  std::string ranks;
  for (std::size_t i = 0; i < config.ranks.size(); ++i) {
    if (i) ranks += ',';
    ranks += std::to_string(config.ranks[i]);
  }
  return "random(dim=" + std::to_string(config.dim) + ";ranks=" + ranks +
         ";seed=" + std::to_string(config.seed) + ")";
}

HarnessConfig harness_config(const RunConfig& config) {
  HarnessConfig h;
  h.t_grid = config.t_grid;
  h.lambda_grid = config.lambda_grid;
  h.eta = config.eta;
  h.n_samples = config.n_samples;
  h.seed = config.seed;
  h.threads = config.threads;
  h.model_label = model_label(config);
  return h;
}

std::filesystem::path out_path(const RunConfig& config,
                               const std::string& name) {
  std::filesystem::create_directories(config.out_dir);
  return std::filesystem::path(config.out_dir) / name;
}

void write_table(const CurveTable& table, const RunConfig& config,
                 const std::string& name) {
  const auto path = out_path(config, name);
  table.write_csv_file(path);
  std::cout << path.string() << ": " << table.rows.size() << " rows\n";
}

int cmd_theorem1(const RunConfig& config) {
  const SubspaceModel model = make_model(config);
  const NoiseSchedule schedule(config.schedule);
  const HarnessConfig h = harness_config(config);

  write_table(rank_ratio_curve(model, schedule, h), config, "rank.csv");
  write_table(linearity_curve(model, schedule, config.t, h), config,
              "linearity.csv");
  write_table(symmetry_curve(model, schedule, h), config, "symmetry.csv");
  write_table(subspace_convergence_curve(model, schedule, h), config,
              "subspace.csv");
  write_table(epsilon_rank_relation(model, schedule, h), config,
              "epsrank.csv");

  const CurveTable report = theorem1_report(model, schedule, h);
  write_table(report, config, "theorem1.csv");

  bool all_pass = true;
  for (const auto& row : report.rows) all_pass = all_pass && row[1] == 1.0;
  return all_pass ? 0 : 1;
}

int cmd_edit(const RunConfig& config) {
  const SubspaceModel model = make_model(config);
  const NoiseSchedule schedule(config.schedule);
  const int d = model.dim();

  Mask omega;
  try {
    omega = config.mask.empty() ? Mask::all(d) : Mask(d, config.mask);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--mask: ") + e.what());
  }

  Rng rng(derive_seed(config.seed, 0xed17));
  const Sample sample = sample_x0(model, rng);
  const EpsPredictor eps = analytic_eps_predictor(model, schedule);
  const Eigen::VectorXd x_t = integrate(schedule, sample.x0, 0.0, config.t,
                                        config.steps, eps, config.grid);

  EditDiscoveryOptions options;
  options.r = std::min(config.r, d);
  options.r_null = std::min(config.r_null, d);
  options.pick = config.pick;
  const EditDirection dir = find_edit_directions(model, schedule, x_t,
                                                 config.t, omega, options, rng);

  const auto path = out_path(config, config.out);
  dir.save(path);

  const DisentanglementScore score = disentanglement_score(
      model, schedule, x_t, config.t, dir, config.lambda);
  const Eigen::VectorXd edited =
      apply_edit(model, schedule, sample.x0, config.t, dir, config.lambda,
                 config.steps, config.grid);
  std::cout << path.string() << ": pick=" << dir.pick << " sigma=" << dir.sigma
            << " inside=" << score.inside << " outside=" << score.outside
            << " clean_change=" << (edited - sample.x0).norm() << "\n";
  return 0;
}

int cmd_roundtrip(const RunConfig& config) {
  const SubspaceModel model = make_model(config);
  const NoiseSchedule schedule(config.schedule);

  Rng rng(derive_seed(config.seed, 0x707d));
  const Sample sample = sample_x0(model, rng);

  std::vector<int> ladder;
  for (int n = config.steps; n >= 2 && ladder.size() < 4; n /= 2)
    ladder.push_back(n);
  std::reverse(ladder.begin(), ladder.end());

  CurveTable table;
  table.name = "roundtrip";
  table.meta.emplace_back("curve", "roundtrip");
  table.meta.emplace_back("model", model_label(config));
  table.meta.emplace_back("schedule", to_string(schedule.kind()));
  table.meta.emplace_back("seed", std::to_string(config.seed));
  table.meta.emplace_back("t_mid", std::to_string(config.t_mid));
  table.columns = {"n_steps", "rel_error", "status"};
  for (int n : ladder) {
    const double err = roundtrip_error(model, schedule, sample.x0,
                                       config.t_mid, n, config.grid);
    table.rows.push_back({static_cast<double>(n), err, 0.0});
  }
  write_table(table, config, "roundtrip.csv");
  return 0;
}

int cmd_gpm_check(const RunConfig& config) {
  constexpr int kDim = 32;
  constexpr int kTop = 5;
  constexpr int kTrials = 50;
  constexpr double kSigmaTol = 1e-6;
  constexpr double kAngleTol = 1e-4;

  CurveTable table;
  table.name = "gpm";
  table.meta.emplace_back("curve", "gpm");
  table.meta.emplace_back("seed", std::to_string(config.seed));
  table.meta.emplace_back("d", std::to_string(kDim));
  table.columns = {"trial", "sigma_rel_err", "angle_max", "status"};

  bool ok = true;
  for (int trial = 0; trial < kTrials; ++trial) {
    Rng rng(derive_seed(config.seed, 0x69e0 + trial));
    // Symmetric matrix with a controlled spectral gap sigma_5 / sigma_6.
    Eigen::MatrixXd gauss = rng.normal_matrix(kDim, kDim);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
    const Eigen::MatrixXd q =
        qr.householderQ() * Eigen::MatrixXd::Identity(kDim, kDim);
    Eigen::VectorXd spectrum(kDim);
    for (int i = 0; i < kTop; ++i) spectrum[i] = 2.0 + 2.0 * rng.uniform();
    std::sort(spectrum.data(), spectrum.data() + kTop,
              std::greater<double>());
    spectrum[kTop] = spectrum[kTop - 1] / (1.1 + 0.4 * rng.uniform());
    for (int i = kTop + 1; i < kDim; ++i)
      spectrum[i] = spectrum[i - 1] * (0.7 + 0.25 * rng.uniform());
    const Eigen::MatrixXd a = q * spectrum.asDiagonal() * q.transpose();

    const DenseSvd oracle = dense_svd(a);
    const TruncatedSvd approx =
        gpm_topk(LinearMapHandle::from_matrix(a), kTop, rng, kGpmMaxIters,
                 1e-12);

    double sigma_err = 0.0;
    for (int i = 0; i < kTop; ++i)
      sigma_err = std::max(sigma_err, std::abs(approx.sigma[i] -
                                               oracle.sigma[i]) /
                                          oracle.sigma[i]);
    const double angle =
        principal_angles(oracle.v.leftCols(kTop), approx.v).maxCoeff();
    const bool pass = sigma_err <= kSigmaTol && angle <= kAngleTol;
    ok = ok && pass;
    table.rows.push_back({static_cast<double>(trial), sigma_err, angle,
                          pass ? 0.0 : 1.0});
  }
  write_table(table, config, "gpm.csv");
  return ok ? 0 : 1;
}

}  // namespace

int dispatch(const std::string& command, const RunConfig& config) {
  const NoiseSchedule schedule(config.schedule);
  if (command == "rank-curve") {
    const SubspaceModel model = make_model(config);
    write_table(rank_ratio_curve(model, schedule, harness_config(config)),
                config, "rank.csv");
    return 0;
  }
  if (command == "linearity-curve") {
    const SubspaceModel model = make_model(config);
    write_table(
        linearity_curve(model, schedule, config.t, harness_config(config)),
        config, "linearity.csv");
    return 0;
  }
  if (command == "symmetry-curve") {
    const SubspaceModel model = make_model(config);
    write_table(symmetry_curve(model, schedule, harness_config(config)),
                config, "symmetry.csv");
    return 0;
  }
  if (command == "subspace-curve") {
    const SubspaceModel model = make_model(config);
    write_table(
        subspace_convergence_curve(model, schedule, harness_config(config)),
        config, "subspace.csv");
    return 0;
  }
  if (command == "epsrank-curve") {
    const SubspaceModel model = make_model(config);
    write_table(epsilon_rank_relation(model, schedule, harness_config(config)),
                config, "epsrank.csv");
    return 0;
  }
  if (command == "theorem1") return cmd_theorem1(config);
  if (command == "edit") return cmd_edit(config);
  if (command == "roundtrip") return cmd_roundtrip(config);
  if (command == "gpm-check") return cmd_gpm_check(config);
  throw UsageError("unknown command '" + command +
                   "'; expected one of: rank-curve, linearity-curve, "
                   "symmetry-curve, subspace-curve, epsrank-curve, theorem1, "
                   "edit, roundtrip, gpm-check");
}

int run_cli(int argc, char** argv) {
  try {
    if (argc < 2)
      throw UsageError(
          "usage: loco <command> [--flag value ...] [--config file]");
    const std::string command = argv[1];

    std::optional<std::string> config_file;
    std::vector<std::string> args;
    for (int i = 2; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--config") {
        if (i + 1 >= argc) throw UsageError("missing value for --config");
        config_file = argv[++i];
      } else {
        args.push_back(arg);
      }
    }

    const RunConfig config = parse_config(args, config_file);
    return dispatch(command, config);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace loco
