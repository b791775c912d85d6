#include "cascade/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <type_traits>

#include "cascade/error.hpp"

namespace cascade {

namespace {

template <class T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string(what) + ": " + e.what());
  }
}

json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json table_to_json(const TriangularTable& t) {
  json rows = json::array();
  for (std::size_t i = 0; i < t.nodes(); ++i) {
    const auto r = t.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

TriangularTable table_from_json(const json& j, std::size_t nodes, const char* name) {
  if (!j.is_array() || j.size() != nodes)
    throw InvalidArgument(std::string("table '") + name + "' has the wrong number of rows");
  TriangularTable t(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const auto row = j[i].get<std::vector<double>>();
    if (row.size() != i + 1) throw InvalidArgument(std::string("table '") + name + "' is not triangular");
    for (std::size_t c = 0; c <= i; ++c) t(i, c) = row[c];
  }
  return t;
}

json delay_to_json(const DelayProfile& d) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantDelay>) {
          return {{"type", "constant"}, {"value", p.value}};
        } else {
          return {{"type", "sinusoid"}, {"h0", p.lo}, {"h", p.hi}, {"omega", p.omega}};
        }
      },
      d.variant());
}

DelayProfile delay_from_json(const json& j) {
  const auto type = get<std::string>(j, "type");
  if (type == "constant") return ConstantDelay{get<double>(j, "value")};
  if (type == "sinusoid") return SinusoidalDelay{get<double>(j, "h0"), get<double>(j, "h"), get<double>(j, "omega")};
  throw InvalidArgument("unknown delay profile type '" + type + "'");
}

json profile_to_json(const FieldProfile& p) {
  switch (p.kind) {
    case FieldProfile::Kind::Zero:
      return {{"type", "zero"}};
    case FieldProfile::Kind::Cosine:
      return {{"type", "cosine"}, {"amplitude", p.amplitude}, {"mode", p.mode}};
    case FieldProfile::Kind::Samples:
      return {{"type", "samples"}, {"values", p.samples}};
  }
  return {};
}

FieldProfile profile_from_json(const json& j) {
  FieldProfile p;
  const auto type = get<std::string>(j, "type");
  if (type == "zero") {
    p.kind = FieldProfile::Kind::Zero;
  } else if (type == "cosine") {
    p.kind = FieldProfile::Kind::Cosine;
    p.amplitude = get<double>(j, "amplitude");
    p.mode = get_or<double>(j, "mode", 1.0);
  } else if (type == "samples") {
    p.kind = FieldProfile::Kind::Samples;
    p.samples = get<std::vector<double>>(j, "values");
    if (p.samples.size() < 2) throw InvalidArgument("sampled profile needs at least two values");
  } else {
    throw InvalidArgument("unknown initial profile type '" + type + "'");
  }
  return p;
}

json tuning_to_json(const TuningParams& t) {
  json j = {{"delta0", t.delta0}, {"delta1", t.delta1}, {"r", t.r}, {"r1", t.r1}};
  return j;
}

json witness_to_json(const TuningParams& t) {
  json j = tuning_to_json(t);
  j["lambda"] = t.lambda;
  j["lambda1"] = t.lambda1;
  j["p1"] = t.p1;
  j["p2"] = t.p2;
  j["P"] = matrix_to_json(t.P);
  return j;
}

TuningParams tuning_from_json(const json& j) {
  TuningParams t;
  t.delta0 = get_or(j, "delta0", t.delta0);
  t.delta1 = get_or(j, "delta1", t.delta1);
  t.r = get_or(j, "r", t.r);
  t.r1 = get_or(j, "r1", t.r1);
  t.lambda = get_or(j, "lambda", t.lambda);
  t.lambda1 = get_or(j, "lambda1", t.lambda1);
  t.p1 = get_or(j, "p1", t.p1);
  t.p2 = get_or(j, "p2", t.p2);
  if (j.contains("P")) t.P = matrix_from_json(j.at("P"));
  return t;
}

}  // namespace

std::vector<double> FieldProfile::sample(const UniformGrid& grid) const {
  std::vector<double> v(grid.nodes(), 0.0);
  switch (kind) {
    case Kind::Zero:
      break;
    case Kind::Cosine:
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = amplitude * std::cos(mode * std::numbers::pi * grid.x(i));
      break;
    case Kind::Samples: {
      const double h = 1.0 / static_cast<double>(samples.size() - 1);
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double s = grid.x(i) / h;
        const auto k = std::min(static_cast<std::size_t>(s), samples.size() - 2);
        const double f = s - static_cast<double>(k);
        v[i] = (1.0 - f) * samples[k] + f * samples[k + 1];
      }
      break;
    }
  }
  return v;
}

InitialData Scenario::initial_data() const {
  return InitialData::constant(simulation.initial.X, simulation.initial.u.sample(grid()));
}

SimulationOptions Scenario::simulation_options() const {
  SimulationOptions o;
  o.T = simulation.T;
  o.dt = simulation.dt;
  o.delay = simulation.delay;
  o.trajectory_stride = output.trajectory_stride;
  o.field_stride = output.field_dump_stride;
  return o;
}

SearchConfig Scenario::search_config() const {
  SearchConfig c;
  c.seeds = seeds;
  c.seed = seed;
  c.max_evals_per_seed = max_evals;
  return c;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) r[static_cast<std::size_t>(c)] = m(i, c);
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array()) throw InvalidArgument("matrix must be an array of rows");
  if (j.empty()) return {};
  const auto cols = j[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto r = j[i].get<std::vector<double>>();
    if (r.size() != cols) throw InvalidArgument("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = r[c];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Scenario

Scenario scenario_from_json(const json& j) {
  return guarded("scenario", [&] {
    Scenario s;
    s.name = get_or<std::string>(j, "name", "");

    const json& p = j.at("plant");
    s.plant.A = matrix_from_json(p.at("A"));
    s.plant.A1 = matrix_from_json(p.at("A1"));
    s.plant.B = matrix_from_json(p.at("B"));
    s.plant.a = get<double>(p, "a");
    s.plant.a2 = get<double>(p, "a2");
    s.plant.h0 = get<double>(p, "h0");
    s.plant.h = get<double>(p, "h");
    s.plant.u_bar = get<double>(p, "u_bar");

    const json& g = j.at("gains");
    s.gains.K = vector_from_json(g.at("K")).transpose();
    s.gains.c = get<double>(g, "c");

    s.actuation = actuation_from_string(get<std::string>(j, "actuation"));
    if (j.contains("tuning")) s.tuning = tuning_from_json(j.at("tuning"));
    if (j.contains("search")) {
      s.seeds = get_or(j.at("search"), "seeds", s.seeds);
      s.seed = get_or(j.at("search"), "seed", s.seed);
      s.max_evals = get_or(j.at("search"), "max_evals", s.max_evals);
    }

    const json& sim = j.at("simulation");
    s.simulation.T = get_or(sim, "T", s.simulation.T);
    s.simulation.dx = get_or(sim, "dx", s.simulation.dx);
    s.simulation.dt = get_or(sim, "dt", s.simulation.dt);
    if (sim.contains("delay_profile")) s.simulation.delay = delay_from_json(sim.at("delay_profile"));
    s.simulation.monitor = get_or(sim, "monitor", false);
    if (sim.contains("initial_data")) {
      const json& init = sim.at("initial_data");
      s.simulation.initial.X = vector_from_json(init.at("X"));
      s.simulation.initial.u = profile_from_json(init.at("u"));
    } else {
      s.simulation.initial.X = Eigen::VectorXd::Zero(s.plant.A.rows());
    }
    s.plant.delay = s.simulation.delay;

    if (j.contains("output")) {
      const json& o = j.at("output");
      s.output.dir = get_or(o, "dir", s.output.dir);
      s.output.field_dump_stride = get_or(o, "field_dump_stride", s.output.field_dump_stride);
      s.output.trajectory_stride = get_or(o, "trajectory_stride", s.output.trajectory_stride);
    }

    validate(s.plant, s.gains);
    validate(s.tuning, s.actuation);
    if (s.simulation.initial.X.size() != s.plant.dim())
      throw InvalidArgument("initial X has the wrong dimension");
    if (!(s.simulation.T > 0.0)) throw InvalidArgument("horizon T must be positive");
    if (!(s.simulation.dx > 0.0 && s.simulation.dx <= 0.5)) throw InvalidArgument("dx must lie in (0, 0.5]");
    (void)s.grid();
    const double dx = s.grid().dx();
    if (!(s.simulation.dt > 0.0) || s.simulation.dt > 0.5 * dx * dx)
      throw InvalidArgument("dt violates the explicit-scheme bound dt <= dx^2 / 2");
    if (s.seeds < 1 || s.max_evals < 1) throw InvalidArgument("search needs at least one seed and one evaluation");
    if (s.output.trajectory_stride == 0) throw InvalidArgument("trajectory_stride must be positive");
    return s;
  });
}

json to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["plant"] = {{"A", matrix_to_json(s.plant.A)},
                {"A1", matrix_to_json(s.plant.A1)},
                {"B", matrix_to_json(s.plant.B)},
                {"a", s.plant.a},
                {"a2", s.plant.a2},
                {"h0", s.plant.h0},
                {"h", s.plant.h},
                {"u_bar", s.plant.u_bar}};
  j["gains"] = {{"K", vector_to_json(s.gains.K.transpose())}, {"c", s.gains.c}};
  j["actuation"] = std::string(to_string(s.actuation));
  j["tuning"] = tuning_to_json(s.tuning);
  j["search"] = {{"seeds", s.seeds}, {"seed", s.seed}, {"max_evals", s.max_evals}};
  j["simulation"] = {{"T", s.simulation.T},
                     {"dx", s.simulation.dx},
                     {"dt", s.simulation.dt},
                     {"delay_profile", delay_to_json(s.simulation.delay)},
                     {"initial_data",
                      {{"X", vector_to_json(s.simulation.initial.X)}, {"u", profile_to_json(s.simulation.initial.u)}}},
                     {"monitor", s.simulation.monitor}};
  j["output"] = {{"dir", s.output.dir},
                 {"field_dump_stride", s.output.field_dump_stride},
                 {"trajectory_stride", s.output.trajectory_stride}};
  return j;
}

// ---------------------------------------------------------------------------
// Kernels

json to_json(const KernelSet& k) {
  return {{"intervals", k.grid.intervals},
          {"reaction_sum", k.reaction_sum},
          {"gamma", matrix_to_json(k.gamma)},
          {"gamma_prime", matrix_to_json(k.gamma_prime)},
          {"psi", matrix_to_json(k.psi)},
          {"psi_prime", matrix_to_json(k.psi_prime)},
          {"gamma_half", matrix_to_json(k.gamma_half)},
          {"gamma_prime_half", matrix_to_json(k.gamma_prime_half)},
          {"psi_half", matrix_to_json(k.psi_half)},
          {"psi_prime_half", matrix_to_json(k.psi_prime_half)},
          {"k_half", k.k_half},
          {"n_half", k.n_half},
          {"kx_half", k.kx_half},
          {"nx_half", k.nx_half},
          {"k", table_to_json(k.k)},
          {"k_x", table_to_json(k.k_x)},
          {"n", table_to_json(k.n)},
          {"n_x", table_to_json(k.n_x)},
          {"q", table_to_json(k.q)},
          {"q_x", table_to_json(k.q_x)},
          {"l", table_to_json(k.l)},
          {"l_x", table_to_json(k.l_x)}};
}

KernelSet kernels_from_json(const json& j) {
  return guarded("kernels", [&] {
    KernelSet k;
    k.grid.intervals = get<std::size_t>(j, "intervals");
    if (k.grid.intervals < 1) throw InvalidArgument("kernel grid needs at least one interval");
    k.reaction_sum = get<double>(j, "reaction_sum");
    const auto N = static_cast<Eigen::Index>(k.grid.nodes());
    const Eigen::Index H = 2 * (N - 1) + 1;

    auto rows = [&](const char* name, Eigen::MatrixXd& m, Eigen::Index expected) {
      m = matrix_from_json(j.at(name));
      if (m.rows() != expected) throw InvalidArgument(std::string("'") + name + "' has the wrong number of rows");
    };
    rows("gamma", k.gamma, N);
    rows("gamma_prime", k.gamma_prime, N);
    rows("psi", k.psi, N);
    rows("psi_prime", k.psi_prime, N);
    rows("gamma_half", k.gamma_half, H);
    rows("gamma_prime_half", k.gamma_prime_half, H);
    rows("psi_half", k.psi_half, H);
    rows("psi_prime_half", k.psi_prime_half, H);
    for (const auto* m : {&k.gamma_prime, &k.psi, &k.psi_prime, &k.gamma_half, &k.gamma_prime_half, &k.psi_half,
                          &k.psi_prime_half})
      if (m->cols() != k.gamma.cols()) throw InvalidArgument("kernel rows disagree on the state dimension");

    auto profile = [&](const char* name, std::vector<double>& v) {
      v = get<std::vector<double>>(j, name);
      if (static_cast<Eigen::Index>(v.size()) != H)
        throw InvalidArgument(std::string("'") + name + "' has the wrong length");
    };
    profile("k_half", k.k_half);
    profile("n_half", k.n_half);
    profile("kx_half", k.kx_half);
    profile("nx_half", k.nx_half);

    const auto n = k.grid.nodes();
    k.k = table_from_json(j.at("k"), n, "k");
    k.k_x = table_from_json(j.at("k_x"), n, "k_x");
    k.n = table_from_json(j.at("n"), n, "n");
    k.n_x = table_from_json(j.at("n_x"), n, "n_x");
    k.q = table_from_json(j.at("q"), n, "q");
    k.q_x = table_from_json(j.at("q_x"), n, "q_x");
    k.l = table_from_json(j.at("l"), n, "l");
    k.l_x = table_from_json(j.at("l_x"), n, "l_x");
    return k;
  });
}

// ---------------------------------------------------------------------------
// Certificates

json to_json(const Certificate& c) {
  json j;
  j["actuation"] = std::string(to_string(c.actuation));
  j["status"] = std::string(to_string(c.status));
  j["beta"] = c.beta;
  j["delta"] = c.delta;
  j["constants"] = {{"zeta", c.constants.zeta}, {"c1", c.constants.c1}, {"c2", c.constants.c2},
                    {"c3", c.constants.c3},     {"xi", c.constants.xi}, {"M1", c.constants.M1},
                    {"M2", c.constants.M2}};
  j["witness"] = witness_to_json(c.witness);
  if (c.feasible()) {
    j["admissible_radius"] = c.admissible_radius();
    j["admissible_coefficients"] = c.admissible_coefficients();
  }
  j["diagnostic"] = c.diagnostic;
  return j;
}

Certificate certificate_from_json(const json& j) {
  return guarded("certificate", [&] {
    Certificate c;
    c.actuation = actuation_from_string(get<std::string>(j, "actuation"));
    c.status = certificate_status_from_string(get<std::string>(j, "status"));
    c.beta = get<double>(j, "beta");
    c.delta = get<double>(j, "delta");
    const json& k = j.at("constants");
    c.constants.zeta = get<double>(k, "zeta");
    c.constants.c1 = get<double>(k, "c1");
    c.constants.c2 = get<double>(k, "c2");
    c.constants.c3 = get<double>(k, "c3");
    c.constants.xi = get<double>(k, "xi");
    c.constants.M1 = get<double>(k, "M1");
    c.constants.M2 = get<double>(k, "M2");
    c.witness = tuning_from_json(j.at("witness"));
    c.diagnostic = get_or<std::string>(j, "diagnostic", "");
    return c;
  });
}

json to_json(const KernelResidualReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"name", e.name},
                       {"value", e.value},
                       {"scale", e.scale},
                       {"order", e.order == Residual::Order::Exact ? "exact" : "second"},
                       {"pass", e.passes(r.dx)}});
  }
  return {{"dx", r.dx}, {"pass", r.all_pass()}, {"entries", entries}};
}

// ---------------------------------------------------------------------------
// Files

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace cascade
