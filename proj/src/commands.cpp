#include "mvb/commands.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "mvb/corepull.hpp"
#include "mvb/errors.hpp"
#include "mvb/format.hpp"
#include "mvb/generate.hpp"
#include "mvb/infbundle.hpp"
#include "mvb/lift.hpp"

namespace mvb {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string report_hash(const json& report) {
  json j = report;
  j.erase("timing_ms");
  j.erase("report_hash");
  return sha256_hex(j.dump());
}

void CommandReport::add(const Certificate& c) {
  certificates.push_back(c.to_json());
  if (!c.passed) {
    counterexamples.push_back(json{{"claim", c.claim}, {"counterexample", c.counterexample}});
    if (status == "ok") {
      status = "failed";
      exit_code = 1;
    }
  }
}

json CommandReport::to_json() const {
  json j{{"format_version", 1},
         {"command", command},
         {"fingerprint", fingerprint},
         {"status", status},
         {"exit_code", exit_code},
         {"result", result},
         {"certificates", certificates},
         {"counterexamples", counterexamples}};
  if (!error.is_null()) j["error"] = error;
  j["timing_ms"] = timing_ms;
  j["report_hash"] = report_hash(j);
  return j;
}

std::string CommandReport::to_text() const {
  std::ostringstream os;
  os << "command:     " << command << "\n"
     << "status:      " << status << " (exit " << exit_code << ")\n";
  if (!fingerprint.empty()) os << "fingerprint: " << fingerprint << "\n";
  if (!error.is_null()) os << "error:       " << error.value("message", std::string()) << "\n";
  for (const auto& c : certificates)
    os << "  [" << c["status"].get<std::string>() << "] " << c["claim"].get<std::string>() << "\n";
  for (const auto& c : counterexamples) os << "  counterexample: " << c["counterexample"].dump() << "\n";
  for (auto it = result.begin(); it != result.end(); ++it)
    if (it.value().is_primitive()) os << "  " << it.key() << " = " << it.value().dump() << "\n";
  os << "report_hash: " << to_json()["report_hash"].get<std::string>() << "\n";
  return os.str();
}

std::string resolve_input(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("MVB_FIXTURE_DIR"); dir && fs::path(path).is_relative()) {
    fs::path alt = fs::path(dir) / path;
    if (fs::exists(alt)) return alt.string();
  }
  throw UsageError("cannot open input \"" + path + "\"");
}

std::string read_input(const std::string& path) {
  std::ifstream in(resolve_input(path), std::ios::binary);
  if (!in) throw UsageError("cannot read input \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

struct Options {
  std::vector<std::string> files;
  std::string i, j, s, k_set;
  int k = 1;
  int n = 3;
  std::string levels = "3,4";
  std::string strategy = "least-chart";
  std::string against;
  std::string output = "json";
  std::string save;
  std::uint64_t seed = 0;
  int samples = 32;
  int orderings = 3;
  int charts = 2, points = 2;
  std::size_t max_dim = 2;
  bool decomposed = false, all_ones = false;
  std::string kind = "atlas";
  int upto = 4;
};

IndexSet parse_set_arg(const std::string& text, const char* flag) {
  std::vector<int> v;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    try {
      v.push_back(std::stoi(cur));
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": bad index \"" + cur + "\"");
    }
    cur.clear();
  };
  for (char ch : text) {
    if (ch == '{' || ch == '}' || ch == ' ') continue;
    if (ch == ',') flush();
    else cur += ch;
  }
  flush();
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end() || (!v.empty() && v.front() < 1))
    throw UsageError(std::string(flag) + ": expected distinct positive indices");
  return IndexSet(v);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> v;
  for (int i : parse_set_arg(text, "--levels")) v.push_back(i);
  return v;
}

class Runner {
 public:
  Runner(const Options& o, CommandReport& r) : o_(o), r_(r) {}

  json load(const std::string& path) {
    json j = parse_text(read_input(path));
    inputs_ += dump(j);
    return j;
  }
  std::shared_ptr<const AtlasPresentation> atlas(const std::string& path, bool check = true) {
    ParsedAtlas pa = parse_atlas(load(path));
    if (!pa.structural.empty()) throw SemanticError("atlas is incomplete: " + pa.structural.front());
    auto A = std::make_shared<const AtlasPresentation>(std::move(pa.atlas));
    if (check) require_valid(*A);
    return A;
  }
  std::string fingerprint() const { return inputs_.empty() ? std::string() : sha256_hex(inputs_); }
  void fingerprint_extra(const std::string& s) { inputs_ += s; }

  SplitOptions split_opts() const {
    SplitOptions so;
    so.strategy = parse_strategy(o_.strategy);
    return so;
  }
  void save(const json& j) {
    if (o_.save.empty()) return;
    std::ofstream out(o_.save, std::ios::binary);
    if (!out) throw UsageError("cannot write \"" + o_.save + "\"");
    out << dump(j);
  }
  const std::string& file(std::size_t i) const {
    if (i >= o_.files.size()) throw UsageError("missing input file");
    return o_.files[i];
  }

  void run(const std::string& cmd);

 private:
  void validate_cmd();
  void face_cmd();
  void core_cmd();
  void core_stages_cmd();
  void pullback_cmd();
  void ultracore_cmd();
  void split_cmd();
  void decompose_cmd();
  void normalize_cmd();
  void torsor_cmd();
  void stato_cmd(const std::string& sub);
  void hom_cmd();
  void tangent_cmd();
  void lift2_cmd();
  void lift3_cmd();
  void inf_truncate_cmd();
  void inf_decompose_cmd();
  void gen_cmd();

  Certificate validity(const AtlasPresentation& A, const std::string& what);

  const Options& o_;
  CommandReport& r_;
  std::string inputs_;
};

json violation_json(const Violation& v) {
  json j{{"kind", v.kind}, {"structural", v.structural}};
  if (!v.alpha.empty()) j["alpha"] = v.alpha;
  if (!v.beta.empty()) j["beta"] = v.beta;
  if (!v.gamma.empty()) j["gamma"] = v.gamma;
  if (!v.point.empty()) j["point"] = v.point;
  if (v.J) j["J"] = to_json(*v.J);
  if (v.rho) j["rho"] = to_json(*v.rho);
  j["message"] = v.message;
  return j;
}

json dims_summary(const AtlasPresentation& A) {
  return json{{"n", A.n()},
              {"points", A.base().size()},
              {"charts", A.charts().size()},
              {"top_fiber_dim", A.dims().node_dim(IndexSet::range(A.n()))},
              {"dims", to_json(A.dims())}};
}

Certificate Runner::validity(const AtlasPresentation& A, const std::string& what) {
  Certificate c(what + " is a valid atlas");
  ValidationReport rep = validate(A);
  c.witnesses = {{"transitions", A.transitions().size()}};
  if (!rep.ok()) c.fail(violation_json(rep.violations.front()));
  return c;
}

void Runner::validate_cmd() {
  json j = load(file(0));
  const std::string kind = j.is_object() ? j.value("kind", std::string("atlas")) : std::string("atlas");
  if (kind == "stabilizing" || kind == "rule") {
    auto X = parse_infinity(j);
    const int upto = o_.upto;
    json levels = json::array();
    for (int n = 0; n <= upto; ++n) {
      auto A = X->truncate(n);
      r_.add(validity(*A, "truncation to [" + std::to_string(n) + "]"));
      levels.push_back(json{{"n", n}, {"top_fiber_dim", A->dims().node_dim(IndexSet::range(n))}});
    }
    r_.result = {{"kind", kind}, {"levels", levels}};
    return;
  }
  if (kind != "atlas") throw SchemaError("$.kind: validate expects an atlas or a generator");
  ParsedAtlas pa = parse_atlas(j);
  ValidationReport rep = validate(pa.atlas);
  Certificate c("atlas satisfies coverage, invertibility and the cocycle law");
  json viols = json::array();
  for (const auto& s : pa.structural) viols.push_back(json{{"kind", "dims"}, {"structural", true}, {"message", s}});
  for (const auto& v : rep.violations) viols.push_back(violation_json(v));
  c.witnesses = {{"transitions", pa.atlas.transitions().size()},
                 {"structural", rep.structural_count() + pa.structural.size()},
                 {"semantic", rep.semantic_count()}};
  if (!viols.empty()) c.fail(viols.front());
  r_.add(c);
  r_.result = dims_summary(pa.atlas);
  r_.result["violations"] = viols;
}

void Runner::face_cmd() {
  auto A = atlas(file(0));
  const IndexSet I = parse_set_arg(o_.i, "--i"), J = parse_set_arg(o_.j, "--j");
  AtlasPresentation F = face(*A, I, J);
  r_.add(validity(F, "face (" + I.str() + ", " + J.str() + ")"));
  r_.result = {{"I", to_json(I)}, {"J", to_json(J)}, {"atlas", to_json(F)}};
  save(to_json(F));
}

void Runner::core_cmd() {
  auto A = atlas(file(0));
  const IndexSet S = o_.s.empty() ? IndexSet::range(A->n()) : parse_set_arg(o_.s, "--s");
  const IndexSet J = parse_set_arg(o_.j, "--j");
  CoreSpec spec = core_spec(A->n(), S, J);
  r_.add(core_closure(*A, S, J));
  AtlasPresentation C = core(*A, S, J);
  r_.add(validity(C, "core (" + S.str() + ", " + J.str() + ")"));
  r_.result = {{"S", to_json(S)},
               {"J", to_json(J)},
               {"rho", to_json(spec.rho.as_partition())},
               {"atlas", to_json(C)}};
  save(to_json(C));
}

void Runner::core_stages_cmd() {
  auto A = atlas(file(0));
  const IndexSet S = o_.s.empty() ? IndexSet::range(A->n()) : parse_set_arg(o_.s, "--s");
  const IndexSet K = parse_set_arg(o_.k_set, "--k"), J = parse_set_arg(o_.j, "--j");
  Rng rng(o_.seed);
  r_.add(core_by_stages(*A, S, K, J, rng, o_.samples));
  r_.result = {{"S", to_json(S)}, {"K", to_json(K)}, {"J", to_json(J)}};
}

void Runner::pullback_cmd() {
  auto A = atlas(file(0));
  PullbackPresentation pb = pullback(A);
  r_.add(pullback_surjective(pb));
  PullbackSplitting ps = split_pullback(A, split_opts());
  r_.add(ps.cert);
  r_.result = {{"total_fiber_dim", A->dims().node_dim(IndexSet::range(A->n()))},
               {"pullback_fiber_dim", pb.P->dims().node_dim(IndexSet::range(A->n()))},
               {"pullback", to_json(*pb.P)}};
  save(to_json(*pb.P));
}

void Runner::ultracore_cmd() {
  auto A = atlas(file(0));
  Rng rng(o_.seed);
  UltracoreSequence seq = ultracore_sequence(A, o_.k, rng, o_.orderings);
  r_.add(seq.exactness);
  const json& w = seq.exactness.witnesses;
  r_.result = {{"k", o_.k},
               {"dim_E", w["dim_E"]},
               {"dim_ultracore", w["dim_ultracore"]},
               {"dim_P", w["dim_P"]},
               {"identity", std::to_string(w["dim_E"].get<std::size_t>()) + " = " +
                                std::to_string(w["dim_ultracore"].get<std::size_t>()) + " + " +
                                std::to_string(w["dim_P"].get<std::size_t>())}};
}

void Runner::split_cmd() {
  auto A = atlas(file(0));
  Splitting s = find_splitting(A, split_opts());
  r_.add(check_splitting(s));
  r_.result = {{"strategy", o_.strategy}, {"splitting", to_json(s.m)}};
  save(to_json(s.m));
}

void Runner::decompose_cmd() {
  auto A = atlas(file(0));
  Decomposition d = decompose(A, split_opts());
  r_.add(check_decomposition(d));
  r_.result = {{"strategy", o_.strategy}, {"decomposition", to_json(d.m)}};
  save(to_json(d.m));
}

void Runner::normalize_cmd() {
  auto A = atlas(file(0));
  Decomposition d = decompose(A, split_opts());
  r_.add(check_decomposition(d));
  AtlasPresentation N = normalize_atlas(*A, d);
  Certificate c("normalized transitions have no non-trivial-partition components");
  std::size_t checked = 0;
  for (const auto& [key, g] : N.transitions()) {
    ++checked;
    if (!is_block_diagonal(g)) {
      auto [from, to, p] = key;
      c.fail({{"from", N.charts()[from].id}, {"to", N.charts()[to].id}, {"point", N.base()[p]}});
    }
  }
  c.witnesses = {{"transitions", checked}};
  r_.add(c);
  r_.add(validity(N, "normalized atlas"));
  r_.result = {{"strategy", o_.strategy}, {"atlas", to_json(N)}};
  save(to_json(N));
}

void Runner::torsor_cmd() {
  auto A = atlas(file(0));
  SplitOptions s1, s2;
  s1.strategy = PasteStrategy::LeastChart;
  s2.strategy = PasteStrategy::Uniform;
  Decomposition d1 = decompose(A, s1);
  Decomposition d2;
  if (!o_.against.empty()) {
    auto src = d1.m.source;
    d2.m = parse_morphism(load(o_.against), src, A);
    r_.add(check_decomposition(d2));
  } else {
    d2 = decompose(A, s2);
  }
  BundleMorphism tau = torsor(d1, d2);
  r_.add(check_torsor(d1, d2, tau));

  // act by a random statomorphism and read it back
  Rng rng(o_.seed);
  std::map<int, Gauge> at;
  for (std::size_t p = 0; p < A->base().size(); ++p)
    at[static_cast<int>(p)] = random_statomorphism(A->dims(), rng);
  BundleMorphism phi = morphism_from_canonical(d1.m.source, d1.m.source, at);
  Decomposition d3 = act(d1, phi);
  Certificate rt("acting by a statomorphism and extracting it round-trips");
  if (!morphism_equal(torsor(d1, d3), phi)) rt.fail({{"reason", "extracted statomorphism differs"}});
  Certificate c3 = check_decomposition(d3);
  if (!c3.passed) rt.fail({{"reason", "acted decomposition is not a decomposition"}, {"detail", c3.counterexample}});
  rt.witnesses = {{"seed", o_.seed}, {"points", A->base().size()}};
  r_.add(rt);
  r_.result = {{"second", o_.against.empty() ? std::string("uniform") : o_.against},
               {"statomorphism", to_json(tau)}};
  save(to_json(tau));
}

Coords random_coords(const DimAssignment& d, Rng& rng) {
  Coords c = zero_coords(d);
  for (auto& v : c)
    for (auto& x : v) x = rng.small_rational();
  return c;
}

void Runner::stato_cmd(const std::string& sub) {
  Gauge g = parse_gauge(load(file(0)));
  Rng rng(o_.seed);
  if (sub == "compose") {
    Gauge f = parse_gauge(load(file(1)));
    if (!(g.source() == f.target())) throw DimensionMismatch("compose: source of the first gauge is not the target of the second");
    Gauge h = compose(g, f);
    Certificate c("compose(g, f) evaluates as g after f");
    for (int t = 0; t < o_.samples; ++t) {
      Coords x = random_coords(f.source(), rng);
      if (!coords_equal(h.evaluate(x), g.evaluate(f.evaluate(x)))) {
        c.fail({{"sample", coords_json(x, f.source())}});
        break;
      }
    }
    c.witnesses = {{"samples", o_.samples}};
    r_.add(c);
    r_.result = {{"statomorphism", is_statomorphism(h)}, {"gauge", to_json(h)}};
    save(to_json(h));
  } else if (sub == "invert") {
    Gauge h = invert(g);
    Certificate c("inverse is two-sided");
    const Gauge id = Gauge::identity(g.source());
    if (!(compose(h, g) == id)) c.fail({{"side", "left"}});
    if (!(compose(g, h) == Gauge::identity(g.target()))) c.fail({{"side", "right"}});
    r_.add(c);
    r_.result = {{"statomorphism", is_statomorphism(h)}, {"gauge", to_json(h)}};
    save(to_json(h));
  } else if (sub == "check") {
    Certificate c("gauge is a statomorphism");
    if (!(g.source() == g.target())) c.fail({{"reason", "source and target dims differ"}});
    else {
      const CubeLayout& L = layout(g.n());
      for (std::size_t s = 0; s < L.count(); ++s)
        if (g.source()[s] && !g.linear_part(s).is_identity()) {
          c.fail({{"J", to_json(L.subsets[s])}, {"reason", "linear part is not the identity"}});
          break;
        }
    }
    r_.add(c);
    r_.result = {{"statomorphism", c.passed}};
  } else {
    throw UsageError("stato: expected compose, invert or check");
  }
}

void Runner::hom_cmd() {
  auto E = atlas(file(0)), F = atlas(file(1));
  AtlasPresentation H = hom_bundle(*E, *F);
  r_.add(validity(H, "hom bundle"));
  r_.result = dims_summary(H);
  save(to_json(H));
}

void Runner::tangent_cmd() {
  auto A = atlas(file(0));
  AtlasPresentation T = tangent_prolongation(*A);
  r_.add(validity(T, "tangent prolongation"));
  r_.result = dims_summary(T);
  save(to_json(T));
}

void Runner::lift2_cmd() {
  auto D = atlas(file(0));
  if (D->n() != 2) throw UsageError("lift2 expects a double vector bundle (n = 2)");
  r_.add(fat_sequence(D));
  LocalSplitOptions lo;
  lo.strategy = parse_strategy(o_.strategy);
  Splitting local = local_split_double(D, lo);
  r_.add(check_splitting(local));
  Splitting found = find_splitting(D, split_opts());
  Decomposition ref = decompose(D, split_opts());
  auto cores = core_decompositions(ref);
  Decomposition d1 = splitting_to_decomposition(D, local, cores);
  Decomposition d2 = splitting_to_decomposition(D, found, cores);
  r_.add(check_decomposition(d1));
  r_.add(check_torsor(d1, d2, torsor(d1, d2)));
  r_.result = {{"strategy", o_.strategy}, {"splitting", to_json(local.m)}};
  save(to_json(local.m));
}

void Runner::lift3_cmd() {
  auto T = atlas(file(0));
  if (T->n() != 3) throw UsageError("lift3 expects a triple vector bundle (n = 3)");
  DoublyLinearSequence seq = doubly_linear_sequence(T);
  r_.add(seq.exactness);
  Decomposition S = decompose(T, split_opts());
  LiftData data = lift_from_decomposition(T, S);
  r_.add(check_lift_compatibility(T, data));
  r_.add(lift_round_trip(T, S));
  r_.add(formula_vs_pipeline(T, splittings_from_lift(T, data), S));
  TripleShape sh(T->dims());
  r_.result = {{"strategy", o_.strategy},
               {"dim_mor2", sh.mor2()},
               {"dim_pairs", sh.pairs()},
               {"dim_sections", sh.sections()}};
}

void Runner::inf_truncate_cmd() {
  auto X = parse_infinity(load(file(0)));
  if (o_.n < 0) throw UsageError("--n must be nonnegative");
  auto A = X->truncate(o_.n);
  r_.add(validity(*A, "truncation to [" + std::to_string(o_.n) + "]"));
  r_.result = {{"n", o_.n}, {"atlas", to_json(*A)}};
  save(to_json(*A));
}

void Runner::inf_decompose_cmd() {
  auto X = parse_infinity(load(file(0)));
  std::vector<int> levels = parse_int_list(o_.levels);
  if (levels.empty()) throw UsageError("--levels must name at least one level");
  TowerDecomposition tower(X, split_opts());
  Certificate c = tower.check_levels(levels);
  r_.add(c);
  json per = json::array();
  for (int n : levels) per.push_back(json{{"n", n}, {"decomposition", check_decomposition(tower.level(n)).to_json()}});
  r_.result = {{"levels", levels}, {"cached_tensors", tower.cached_tensors()}, {"per_level", per}};
}

void Runner::gen_cmd() {
  GenOptions g;
  g.n = o_.n;
  g.max_dim = o_.max_dim;
  g.all_ones = o_.all_ones;
  g.charts = o_.charts;
  g.points = o_.points;
  g.twisted = !o_.decomposed;
  if (g.n < 0 || g.n > 6) throw UsageError("--n must lie in [0, 6]");
  if (g.charts < 1 || g.points < 1) throw UsageError("--charts and --points must be positive");
  Rng rng(o_.seed);
  AtlasPresentation A = random_instance(g, rng);
  json out;
  if (o_.kind == "atlas") {
    out = to_json(A);
  } else if (o_.kind == "stabilizing") {
    out = InfinityPresentation::stabilizing(A)->to_json();
  } else {
    throw UsageError("--kind must be atlas or stabilizing");
  }
  fingerprint_extra(dump(out));
  r_.add(validity(A, "generated instance"));
  r_.result = {{"seed", o_.seed}, {"instance", out}};
  save(out);
}

void Runner::run(const std::string& cmd) {
  if (cmd == "validate") validate_cmd();
  else if (cmd == "face") face_cmd();
  else if (cmd == "core") core_cmd();
  else if (cmd == "core-stages") core_stages_cmd();
  else if (cmd == "pullback") pullback_cmd();
  else if (cmd == "ultracore") ultracore_cmd();
  else if (cmd == "split") split_cmd();
  else if (cmd == "decompose") decompose_cmd();
  else if (cmd == "normalize") normalize_cmd();
  else if (cmd == "torsor") torsor_cmd();
  else if (cmd.rfind("stato ", 0) == 0) stato_cmd(cmd.substr(6));
  else if (cmd == "hom") hom_cmd();
  else if (cmd == "tangent") tangent_cmd();
  else if (cmd == "lift2") lift2_cmd();
  else if (cmd == "lift3") lift3_cmd();
  else if (cmd == "inf truncate") inf_truncate_cmd();
  else if (cmd == "inf decompose") inf_decompose_cmd();
  else if (cmd == "gen") gen_cmd();
  else throw UsageError("unknown command " + cmd);
}

json error_json(const char* kind, const std::string& msg) { return json{{"kind", kind}, {"message", msg}}; }

}  // namespace

RunResult run_command(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Multiple vector bundles over finite bases", "mvb"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mvb 1.0");

  auto files = [&](CLI::App* sc, const char* what) {
    sc->add_option("files", o.files, what)->required();
  };
  auto common = [&](CLI::App* sc) {
    sc->add_option("--output", o.output, "json or text")->check(CLI::IsMember({"json", "text"}));
    sc->add_option("--save", o.save, "write the main result object to a file");
    sc->add_option("--seed", o.seed, "seed for sampled checks");
  };
  auto strategy = [&](CLI::App* sc) {
    sc->add_option("--strategy", o.strategy, "least-chart or uniform")
        ->check(CLI::IsMember({"least-chart", "uniform", "uniform-average"}));
  };

  std::vector<std::pair<CLI::App*, std::string>> cmds;
  auto sub = [&](CLI::App* parent, const std::string& name, const std::string& desc, const std::string& full) {
    CLI::App* sc = parent->add_subcommand(name, desc);
    common(sc);
    cmds.emplace_back(sc, full);
    return sc;
  };

  auto* v = sub(&app, "validate", "validate an atlas or a generator", "validate");
  files(v, "atlas or generator file");
  v->add_option("--n", o.upto, "highest truncation checked for generators");
  auto* fc = sub(&app, "face", "(I,J)-face", "face");
  files(fc, "atlas");
  fc->add_option("--i", o.i, "I, e.g. 1,2")->required();
  fc->add_option("--j", o.j, "J, a subset of I");
  auto* co = sub(&app, "core", "(S,J)-core", "core");
  files(co, "atlas");
  co->add_option("--s", o.s, "S (default [n])");
  co->add_option("--j", o.j, "J")->required();
  auto* cs = sub(&app, "core-stages", "core of a core against the direct core", "core-stages");
  files(cs, "atlas");
  cs->add_option("--s", o.s, "S (default [n])");
  cs->add_option("--k", o.k_set, "K, the first stage")->required();
  cs->add_option("--j", o.j, "J, containing K")->required();
  cs->add_option("--samples", o.samples);
  auto* pb = sub(&app, "pullback", "n-pullback and its splitting", "pullback");
  files(pb, "atlas");
  strategy(pb);
  auto* uc = sub(&app, "ultracore", "ultracore short exact sequence", "ultracore");
  files(uc, "atlas");
  uc->add_option("--k", o.k, "the distinguished index")->required();
  uc->add_option("--orderings", o.orderings, "orderings compared for iota");
  auto* sp = sub(&app, "split", "linear splitting", "split");
  files(sp, "atlas");
  strategy(sp);
  auto* de = sub(&app, "decompose", "decomposition", "decompose");
  files(de, "atlas");
  strategy(de);
  auto* no = sub(&app, "normalize", "atlas with block-diagonal transitions", "normalize");
  files(no, "atlas");
  strategy(no);
  auto* to = sub(&app, "torsor", "statomorphism between two decompositions", "torsor");
  files(to, "atlas");
  to->add_option("--against", o.against, "decomposition file to compare with (default: uniform strategy)");

  CLI::App* st = app.add_subcommand("stato", "gauge and statomorphism operations");
  st->require_subcommand(1);
  auto* stc = sub(st, "compose", "g after f", "stato compose");
  files(stc, "gauge files g f");
  stc->add_option("--samples", o.samples);
  files(sub(st, "invert", "inverse gauge", "stato invert"), "gauge file");
  files(sub(st, "check", "statomorphism test", "stato check"), "gauge file");

  files(sub(&app, "hom", "hom bundle of two atlases", "hom"), "atlas files E F");
  files(sub(&app, "tangent", "tangent prolongation", "tangent"), "atlas");
  auto* l2 = sub(&app, "lift2", "n=2 sections, local splitting", "lift2");
  files(l2, "atlas");
  strategy(l2);
  auto* l3 = sub(&app, "lift3", "n=3 sections, horizontal lift", "lift3");
  files(l3, "atlas");
  strategy(l3);

  CLI::App* inf = app.add_subcommand("inf", "infinity-fold generators");
  inf->require_subcommand(1);
  auto* it = sub(inf, "truncate", "truncation to [n]", "inf truncate");
  files(it, "generator");
  it->add_option("--n", o.n)->required();
  auto* id = sub(inf, "decompose", "tower of decompositions", "inf decompose");
  files(id, "generator");
  id->add_option("--levels", o.levels, "levels, e.g. 3,4");
  id->add_option("--n", o.n);
  strategy(id);

  auto* ge = sub(&app, "gen", "random twisted instance", "gen");
  ge->add_option("--n", o.n);
  ge->add_option("--charts", o.charts);
  ge->add_option("--points", o.points);
  ge->add_option("--max-dim", o.max_dim);
  ge->add_flag("--decomposed", o.decomposed, "no twist");
  ge->add_flag("--all-ones", o.all_ones, "every dimension 1");
  ge->add_option("--kind", o.kind, "atlas or stabilizing")->check(CLI::IsMember({"atlas", "stabilizing"}));

  RunResult res;
  std::vector<const char*> argv{"mvb"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream out, err;
    int code = app.exit(e, out, err);
    res.out = out.str();
    res.err = err.str();
    res.exit_code = code == 0 ? 0 : 2;
    return res;
  }

  std::string cmd;
  for (const auto& [sc, full] : cmds)
    if (sc->parsed()) cmd = full;

  CommandReport rep;
  rep.command = cmd;
  Runner runner(o, rep);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    runner.run(cmd);
  } catch (const SyntaxError& e) {
    rep.error = error_json("syntax", e.what());
    rep.error["byte_offset"] = e.byte_offset();
    rep.exit_code = 2;
  } catch (const SchemaError& e) {
    rep.error = error_json("schema", e.what());
    rep.exit_code = 2;
  } catch (const UsageError& e) {
    rep.error = error_json("usage", e.what());
    rep.exit_code = 2;
  } catch (const InvalidArgument& e) {
    rep.error = error_json("usage", e.what());
    rep.exit_code = 2;
  } catch (const NotInvertible& e) {
    rep.error = error_json("semantic", e.what());
    rep.error["subset"] = e.subset();
    rep.counterexamples.push_back(json{{"claim", "gauge is invertible"}, {"counterexample", {{"J", e.subset()}}}});
    rep.exit_code = 1;
  } catch (const Error& e) {
    rep.error = error_json("semantic", e.what());
    rep.counterexamples.push_back(json{{"claim", "input satisfies the invariants"}, {"counterexample", e.what()}});
    rep.exit_code = 1;
  }
  if (!rep.error.is_null()) rep.status = rep.exit_code == 2 ? "error" : "failed";
  rep.fingerprint = runner.fingerprint();
  rep.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  res.exit_code = rep.exit_code;
  if (o.output == "text") res.out = rep.to_text();
  else res.out = dump(rep.to_json());
  if (!rep.error.is_null()) res.err = "mvb: " + rep.error["message"].get<std::string>() + "\n";
  return res;
}

}  // namespace mvb
