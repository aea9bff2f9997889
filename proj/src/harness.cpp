#include "pfcflow/harness.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace pfcflow {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config

RunConfig RunConfig::from_preset(std::string_view name, double scale) {
  const Preset pr = pfcflow::preset(name, scale);
  RunConfig cfg;
  cfg.preset = pr.name;
  cfg.scale = scale;
  cfg.grid = pr.grid;
  cfg.params = pr.params;
  cfg.scenario = pr.scenario;
  cfg.dt = pr.run.dt;
  cfg.t_end = pr.run.t_end;
  return cfg;
}

void RunConfig::validate() const {
  params.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw UsageError("config: dt must be > 0");
  if (!(t_end >= dt * (1.0 - 1e-12))) throw UsageError("config: t_end must be >= dt");
  if (snapshot_every < 1 || diag_every < 1) throw UsageError("config: cadences must be >= 1");
  if (!(solver.tol > 0.0)) throw UsageError("config: tol must be > 0");
  if (solver.maxit < 0) throw UsageError("config: maxit must be >= 0");
  if (levels < 2) throw UsageError("config: levels must be >= 2");
  if (stability.k < 0 || stability.l < 0) throw UsageError("config: k, l must be >= 0");
  if (stability.steps < 4) throw UsageError("config: steps must be >= 4");
}

long RunConfig::step_count() const {
  const double r = t_end / dt;
  return static_cast<long>(std::ceil(r - 1e-9 * std::max(1.0, r)));
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  std::size_t line;
};

double to_double(const std::string& key, const Entry& e) {
  char* end = nullptr;
  const double v = std::strtod(e.value.c_str(), &end);
  if (end == e.value.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ParseError("config line " + std::to_string(e.line) + ": " + key + " expects a number, got '" +
                         e.value + "'",
                     e.line);
  }
  return v;
}

int to_int(const std::string& key, const Entry& e) {
  const double v = to_double(key, e);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ParseError("config line " + std::to_string(e.line) + ": " + key + " expects an integer", e.line);
  }
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ParseError("config line " + std::to_string(e.line) + ": " + key + " expects true or false", e.line);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "scheme", "schemes", "preset",     "scale",     "dt",         "t_end",   "snapshot_every",
      "diag_every", "tol", "maxit",      "preconditioner", "output_dir", "record_timing", "levels",
      "nx",     "ny",      "lx",         "ly",        "a",          "alpha",   "epsilon",
      "mobility", "eta",   "c0",         "m0",        "model",      "k",       "l",
      "phi_ss", "amplitude", "steps"};
  return keys;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'", line_no);
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!known_keys().count(key)) {
      throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'", line_no);
    }
    if (value.empty()) {
      throw ParseError("config line " + std::to_string(line_no) + ": empty value for '" + key + "'", line_no);
    }
    if (kv.count(key)) {
      throw ParseError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'", line_no);
    }
    kv.emplace(std::move(key), Entry{std::move(value), line_no});
  }
  auto has = [&](const char* k) { return kv.count(k) > 0; };
  auto num = [&](const char* k) { return to_double(k, kv.at(k)); };
  auto integer = [&](const char* k) { return to_int(k, kv.at(k)); };

  const std::string preset_name = has("preset") ? kv.at("preset").value : "accuracy";
  const double scale = has("scale") ? num("scale") : 1.0;
  RunConfig cfg = RunConfig::from_preset(preset_name, scale);

  if (has("scheme")) cfg.scheme = parse_scheme(kv.at("scheme").value);
  if (has("schemes")) {
    std::stringstream ss(kv.at("schemes").value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string name = trim(item);
      if (!name.empty()) cfg.schemes.push_back(parse_scheme(name));
    }
    if (cfg.schemes.empty()) throw ParseError("config: schemes is empty", kv.at("schemes").line);
  }

  if (has("nx") || has("ny") || has("lx") || has("ly")) {
    const int nx = has("nx") ? integer("nx") : cfg.grid.nx();
    const int ny = has("ny") ? integer("ny") : cfg.grid.ny();
    const double lx = has("lx") ? num("lx") : cfg.grid.lx();
    const double ly = has("ly") ? num("ly") : cfg.grid.ly();
    cfg.grid = GridSpec(nx, ny, lx, ly);
    cfg.stability.n = nx;
  }

  ModelParams& p = cfg.params;
  if (has("epsilon") && has("alpha")) {
    throw ParseError("config: give either epsilon or alpha, not both", kv.at("alpha").line);
  }
  if (has("epsilon")) {
    p.epsilon = num("epsilon");
    p.alpha = 1.0 - p.epsilon;
  }
  if (has("alpha")) p.alpha = num("alpha");
  if (has("a")) p.a = num("a");
  if (has("mobility")) p.mobility = num("mobility");
  if (has("eta")) p.eta = num("eta");
  if (has("c0")) p.c0 = num("c0");
  p.m0 = has("m0") ? num("m0") : integrate(initial_field(cfg.grid, cfg.scenario));

  if (has("dt")) cfg.dt = num("dt");
  if (has("t_end")) cfg.t_end = num("t_end");
  if (has("snapshot_every")) cfg.snapshot_every = integer("snapshot_every");
  if (has("diag_every")) cfg.diag_every = integer("diag_every");
  if (has("tol")) cfg.solver.tol = num("tol");
  if (has("maxit")) cfg.solver.maxit = integer("maxit");
  if (has("preconditioner")) {
    const std::string& v = kv.at("preconditioner").value;
    if (v == "spectral") {
      cfg.solver.spectral_preconditioner = true;
    } else if (v == "none") {
      cfg.solver.spectral_preconditioner = false;
    } else {
      throw ParseError("config: preconditioner must be spectral or none", kv.at("preconditioner").line);
    }
  }
  if (has("output_dir")) cfg.output_dir = kv.at("output_dir").value;
  if (has("record_timing")) cfg.record_timing = to_bool("record_timing", kv.at("record_timing"));
  if (has("levels")) cfg.levels = integer("levels");

  StabilitySettings& st = cfg.stability;
  st.model = has("model") ? parse_stability_model(kv.at("model").value) : model_of(cfg.scheme);
  if (has("k")) st.k = integer("k");
  if (has("l")) st.l = integer("l");
  if (has("phi_ss")) st.phi_ss = num("phi_ss");
  if (has("amplitude")) st.amplitude = num("amplitude");
  if (has("steps")) st.steps = integer("steps");

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_environment(RunConfig& cfg) {
  if (const char* dir = std::getenv("PFCFLOW_OUTPUT_DIR"); dir != nullptr && *dir != '\0') cfg.output_dir = dir;
}

// ---------------------------------------------------------------------------
// Diagnostics

std::string_view diag_header() noexcept { return "step,t,mass,energy,aux,L,solver_iters,residual,wall_ms"; }

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_diag(const DiagRecord& r) {
  std::string s = std::to_string(r.step);
  for (double v : {r.t, r.mass, r.energy, r.aux, r.L}) s += "," + g17(v);
  s += "," + std::to_string(r.solver_iters);
  s += "," + g17(r.residual);
  s += "," + g17(r.wall_ms);
  return s;
}

DiagRecord make_diag(const StepperState& s, const ModelParams& p) {
  DiagRecord r;
  r.step = s.n;
  r.t = s.t;
  r.mass = integrate(s.phi);
  r.energy = discrete_energy(s, p);
  if (s.aux.zeta) {
    r.aux = *s.aux.zeta;
  } else if (s.aux.kind == AuxKind::EqField) {
    r.aux = norm(*s.aux.q);
  } else {
    r.aux = s.aux.r();
  }
  r.L = s.last_L;
  return r;
}

// ---------------------------------------------------------------------------
// Snapshots

std::string encode_snapshot(const Field& f, double t) {
  const GridSpec& g = f.grid();
  std::string out = "PFCFIELD 1 " + std::to_string(g.nx()) + " " + std::to_string(g.ny()) + " " + g17(g.lx()) +
                    " " + g17(g.ly()) + " " + g17(t) + "\n";
  const std::size_t header = out.size();
  out.resize(header + 8 * f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(f[k]);
    for (int b = 0; b < 8; ++b) out[header + 8 * k + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
  return out;
}

Snapshot decode_snapshot(std::string_view bytes) {
  const std::size_t nl = bytes.find('\n');
  if (nl == std::string_view::npos || nl > 512) throw ParseError("snapshot: header line not terminated", 0);
  const std::string header(bytes.substr(0, nl));
  if (header.rfind("PFCFIELD ", 0) != 0) throw ParseError("snapshot: bad magic", 0);

  std::vector<std::pair<std::string, std::size_t>> tokens;
  for (std::size_t i = 0; i < header.size();) {
    while (i < header.size() && header[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < header.size() && header[i] != ' ') ++i;
    if (i > start) tokens.emplace_back(header.substr(start, i - start), start);
  }
  if (tokens.size() != 7) throw ParseError("snapshot: header needs 7 fields", nl);
  auto real = [&](int idx) {
    const auto& [tok, off] = tokens[idx];
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw ParseError("snapshot: malformed number '" + tok + "'", off);
    return v;
  };
  auto count = [&](int idx) {
    const double v = real(idx);
    if (v != std::floor(v) || v < 1 || v > 1e6) {
      throw ParseError("snapshot: malformed count '" + tokens[idx].first + "'", tokens[idx].second);
    }
    return static_cast<int>(v);
  };
  if (tokens[1].first != "1") throw ParseError("snapshot: unsupported version " + tokens[1].first, tokens[1].second);
  const int nx = count(2);
  const int ny = count(3);
  const double lx = real(4);
  const double ly = real(5);
  const double t = real(6);
  GridSpec g = [&] {
    try {
      return GridSpec(nx, ny, lx, ly);
    } catch (const UsageError& e) {
      throw ParseError(std::string("snapshot: ") + e.what(), tokens[2].second);
    }
  }();

  const std::size_t payload = nl + 1;
  const std::size_t need = 8 * g.size();
  const std::size_t have = bytes.size() - payload;
  if (have < need) {
    throw ParseError("snapshot: truncated payload (" + std::to_string(have) + " of " + std::to_string(need) +
                         " bytes)",
                     payload + have - have % 8);
  }
  if (have > need) throw ParseError("snapshot: trailing bytes after payload", payload + need);
  Field f(g);
  for (std::size_t k = 0; k < f.size(); ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[payload + 8 * k + b])) << (8 * b);
    }
    f[k] = std::bit_cast<double>(bits);
  }
  return Snapshot{std::move(f), t};
}

void write_snapshot(const Field& f, double t, const std::string& path) {
  const std::string bytes = encode_snapshot(f, t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_snapshot(ss.str());
}

// ---------------------------------------------------------------------------
// Driver

namespace {

class DiagWriter {
public:
  explicit DiagWriter(const std::string& path) {
    if (path.empty()) return;
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
    out_ << diag_header() << '\n';
  }
  void add(const DiagRecord& r) {
    if (!out_.is_open()) return;
    out_ << format_diag(r) << '\n';
    if (!out_) throw std::runtime_error("diagnostics write failed");
  }
  void flush() {
    if (out_.is_open()) out_.flush();
  }

private:
  std::ofstream out_;
};

std::string snapshot_name(const std::string& dir, SchemeId s, long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%08ld.pfc", step);
  return (fs::path(dir) / ("snap_" + std::string(to_string(s)) + buf)).string();
}

}  // namespace

RunResult run(const RunConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const bool files = !cfg.output_dir.empty();
  if (files) fs::create_directories(cfg.output_dir);
  const SchemeId scheme = cfg.scheme;
  const ModelParams& p = cfg.params;

  RunResult res{init_state(scheme, initial_field(cfg.grid, cfg.scenario), p), {}, {}, 0.0};
  DiagWriter diag(files ? (fs::path(cfg.output_dir) / ("diag_" + std::string(to_string(scheme)) + ".csv")).string()
                        : std::string());
  auto snapshot = [&](const StepperState& s) {
    if (!files) return;
    const std::string path = snapshot_name(cfg.output_dir, scheme, s.n);
    write_snapshot(s.phi, s.t, path);
    res.snapshot_paths.push_back(path);
  };
  auto record = [&](DiagRecord r) {
    diag.add(r);
    res.diagnostics.push_back(r);
  };

  record(make_diag(res.final_state, p));
  snapshot(res.final_state);

  const long steps = cfg.step_count();
  for (long n = 0; n < steps; ++n) {
    StepperState& cur = res.final_state;
    const auto t0 = clock::now();
    std::pair<StepperState, StepReport> out = [&] {
      try {
        return advance(cur, p, cfg.dt, cfg.solver);
      } catch (...) {
        diag.flush();
        snapshot(cur);
        throw;
      }
    }();
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    const StepReport& rep = out.second;
    if (rep.energy_after > rep.energy_before + 1e-12 * std::abs(rep.energy_before)) {
      diag.flush();
      snapshot(cur);
      std::ostringstream msg;
      msg << to_string(scheme) << ": energy increased at step " << cur.n + 1 << " ("
          << g17(rep.energy_before) << " -> " << g17(rep.energy_after) << ")";
      throw EnergyGuardError(msg.str(), cur.n + 1);
    }
    if (observer) observer(cur, out.first, rep);
    cur = std::move(out.first);
    const bool last = n + 1 == steps;
    if (cur.n % cfg.diag_every == 0 || last) {
      DiagRecord r = make_diag(cur, p);
      r.energy = rep.energy_after;
      r.solver_iters = rep.solver.iterations;
      r.residual = rep.solver.final_residual;
      r.wall_ms = cfg.record_timing ? ms : 0.0;
      record(r);
    }
    if (cur.n % cfg.snapshot_every == 0 || last) snapshot(cur);
  }
  diag.flush();
  res.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  return res;
}

ConvergenceResult converge(const RunConfig& cfg) {
  cfg.validate();
  ConvergenceResult out;
  for (int k = 0; k < cfg.levels; ++k) {
    RunConfig c = cfg;
    c.dt = cfg.dt / std::ldexp(1.0, k);
    c.output_dir.clear();
    c.diag_every = std::numeric_limits<int>::max();
    c.snapshot_every = std::numeric_limits<int>::max();
    if (std::abs(c.step_count() * c.dt - c.t_end) > 1e-9 * c.t_end) {
      throw UsageError("converge: t_end is not a multiple of dt / 2^" + std::to_string(k));
    }
    out.dts.push_back(c.dt);
    out.finals.push_back(run(c).final_state);
  }
  for (int k = 0; k + 1 < cfg.levels; ++k) {
    ConvergenceRow row;
    row.dt_coarse = out.dts[k];
    row.dt_fine = out.dts[k + 1];
    row.l2_error = norm(out.finals[k].phi - out.finals[k + 1].phi);
    row.order = k == 0 ? std::numeric_limits<double>::quiet_NaN()
                       : std::log2(out.rows.back().l2_error / row.l2_error);
    out.rows.push_back(row);
  }
  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    const auto path = fs::path(cfg.output_dir) / ("converge_" + std::string(to_string(cfg.scheme)) + ".csv");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    f << "dt_coarse,dt_fine,l2_error,order\n";
    for (const ConvergenceRow& r : out.rows) {
      f << g17(r.dt_coarse) << ',' << g17(r.dt_fine) << ',' << g17(r.l2_error) << ',' << g17(r.order) << '\n';
    }
  }
  return out;
}

CompareResult compare(const RunConfig& cfg) {
  cfg.validate();
  CompareResult out;
  out.schemes = cfg.schemes.empty() ? std::vector<SchemeId>{cfg.scheme} : cfg.schemes;
  for (SchemeId s : out.schemes) {
    RunConfig c = cfg;
    c.scheme = s;
    out.runs.push_back(run(c));
  }
  if (!cfg.output_dir.empty()) {
    const auto path = fs::path(cfg.output_dir) / "compare.csv";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    f << "step,t";
    for (SchemeId s : out.schemes) f << ",mass_" << to_string(s) << ",energy_" << to_string(s);
    f << '\n';
    const std::size_t rows = out.runs.front().diagnostics.size();
    for (std::size_t i = 0; i < rows; ++i) {
      const DiagRecord& r0 = out.runs.front().diagnostics[i];
      f << r0.step << ',' << g17(r0.t);
      for (const RunResult& r : out.runs) f << ',' << g17(r.diagnostics[i].mass) << ',' << g17(r.diagnostics[i].energy);
      f << '\n';
    }
  }
  return out;
}

}  // namespace pfcflow
