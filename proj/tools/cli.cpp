#include "cli.hpp"

#include "exchkit/polytope.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace exchkit::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

[[noreturn]] void parse_fail(const std::string& detail) { throw Error(ErrorKind::ParseError, detail); }

std::string read_text(const std::string& path, std::istream& in) {
  std::ostringstream buffer;
  if (path == "-") {
    buffer << in.rdbuf();
  } else {
    std::ifstream file(path);
    if (!file) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
    buffer << file.rdbuf();
  }
  return buffer.str();
}

void write_text(const std::string& path, std::ostream& out, const std::string& text) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  file << text;
}

Rational json_rational(const nlohmann::json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  parse_fail("rational values must be \"p/q\" strings or integers");
}

std::vector<Rational> json_rationals(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array()) parse_fail(std::string("missing array \"") + key + "\"");
  std::vector<Rational> out;
  for (const auto& v : doc[key]) out.push_back(json_rational(v));
  return out;
}

int json_int(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer()) parse_fail(std::string("missing integer \"") + key + "\"");
  return doc[key].get<int>();
}

ordered_json rational_array(const std::vector<Rational>& values) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : values) arr.push_back(format_rational(v));
  return arr;
}

ordered_json header(const char* kind) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = kind;
  return doc;
}

// "4,2" or "4..6,2" per component; expands to the cross product.
std::vector<std::vector<int>> expand_ranges(const std::string& spec) {
  std::vector<std::pair<int, int>> bounds;
  std::stringstream parts(spec);
  std::string part;
  while (std::getline(parts, part, ',')) {
    try {
      std::size_t used = 0;
      const auto dots = part.find("..");
      int lo = std::stoi(part, &used);
      int hi = lo;
      if (dots != std::string::npos) {
        if (used != dots) throw std::invalid_argument(part);
        hi = std::stoi(part.substr(dots + 2), &used);
        used += dots + 2;
      }
      if (used != part.size() || lo > hi) throw std::invalid_argument(part);
      bounds.emplace_back(lo, hi);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidArgument, "bad range \"" + spec + "\"");
    }
  }
  if (bounds.empty()) throw Error(ErrorKind::InvalidArgument, "empty range");
  std::vector<std::vector<int>> out{{}};
  for (auto [lo, hi] : bounds) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : out) {
      for (int v = lo; v <= hi; ++v) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<int> single_tuple(const std::string& spec) {
  auto all = expand_ranges(spec);
  if (all.size() != 1) throw Error(ErrorKind::InvalidArgument, "expected a single order, got \"" + spec + "\"");
  return all.front();
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : ",") + t;
  return out;
}

std::string lambda_name(const DfpeOrder& n, const DfpeOrder& r) { return "Λ^" + n.str() + "_" + r.str(); }
std::string gamma_name(int n, int r) { return "Γ^(" + std::to_string(n) + ")_" + std::to_string(r); }

std::string format_vector(const std::vector<Rational>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_rational(v[i]);
  return out + "]";
}

// Prints a verdict and returns its JSON record.
ordered_json report_verdict(const std::string& polytope, const std::string& target, const MembershipCertificate& cert,
                            const PointV& point, const std::vector<PointV>& vertices, std::ostream& out) {
  ordered_json rec;
  rec["polytope"] = polytope;
  if (cert.inside()) {
    out << polytope << ": Inside, extendible to " << target << "\n";
    rec["verdict"] = "inside";
    rec["barycentric"] = rational_array(*cert.barycentric);
  } else {
    const bool verified = verify_certificate(cert, point, vertices);
    out << polytope << ": Outside, not extendible to " << target << "\n";
    out << "  separating hyperplane z = " << format_vector(cert.hyperplane->z)
        << ", z0 = " << format_rational(cert.hyperplane->z0) << (verified ? " (re-verified exactly)" : " (VERIFICATION FAILED)")
        << "\n";
    rec["verdict"] = "outside";
    rec["hyperplane"] = {{"z", rational_array(cert.hyperplane->z)}, {"z0", format_rational(cert.hyperplane->z0)}};
    rec["verified"] = verified;
  }
  return rec;
}

std::vector<PointV> lambda_points(const DfpeOrder& n, const DfpeOrder& r) {
  std::vector<PointV> pts;
  for (const auto& v : extendibility_vertices(n, r)) pts.push_back(v.to_point());
  return pts;
}

unsigned resolve_workers(unsigned requested) {
  if (const char* env = std::getenv("EXCHKIT_WORKERS")) {
    try {
      std::size_t used = 0;
      const long v = std::stol(env, &used);
      if (used == std::string(env).size() && v >= 1) return static_cast<unsigned>(v);
    } catch (const std::logic_error&) {
    }
    throw Error(ErrorKind::InvalidArgument, std::string("EXCHKIT_WORKERS must be a positive integer, got \"") + env + "\"");
  }
  if (requested < 1) throw Error(ErrorKind::InvalidArgument, "--workers must be >= 1");
  return requested;
}

std::string csv_tuple(const std::vector<int>& t) {
  if (t.size() == 1) return std::to_string(t.front());
  std::string s = "\"";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + "\"";
}

// ---- subcommands ---------------------------------------------------------

struct TransformArgs {
  std::string input, to, output = "-";
};

int cmd_dfpe_transform(const TransformArgs& a, std::istream& in, std::ostream& out) {
  auto loaded = parse_distribution(read_text(a.input, in));
  const auto* d = std::get_if<DfpeDistribution>(&loaded);
  if (!d) throw Error(ErrorKind::InvalidArgument, "dfpe-transform needs a dfpe document");
  std::string doc;
  if (a.to == "weights") {
    doc = dfpe_document(*d);
  } else if (a.to == "moments") {
    doc = dfpe_document(moments_from_weights(*d));
  } else {
    doc = dfpe_document(covariances_from_moments(moments_from_weights(*d)));
  }
  write_text(a.output, out, doc + "\n");
  return kOk;
}

struct ExtendArgs {
  std::string input;
  std::vector<std::string> r;
  bool frontier = false;
  std::vector<std::string> max_r;
  std::string json_path;
};

int extend_dfpe(const DfpeDistribution& d, const ExtendArgs& a, std::ostream& out, ordered_json& report) {
  const DfpeOrder& n = d.order();
  report["order"] = n.sizes();
  const PointV point = moments_from_weights(d).to_point();
  for (const auto& spec : a.r) {
    DfpeOrder r(single_tuple(spec));
    if (r.groups() != n.groups() || !n.within(r)) {
      throw Error(ErrorKind::InvalidArgument, "--r " + r.str() + " must be componentwise >= " + n.str());
    }
    auto rec = report_verdict(lambda_name(n, r), "order " + r.str(), dfpe_extendible(d, r), point, lambda_points(n, r), out);
    rec["r"] = r.sizes();
    report["results"].push_back(rec);
  }
  if (!a.frontier) return kOk;
  DfpeOrder max_r(single_tuple(join_tokens(a.max_r)));
  if (max_r.groups() != n.groups()) throw Error(ErrorKind::InvalidArgument, "--max-r has the wrong number of groups");
  const FrontierResult f = extendibility_frontier(d, max_r);
  ordered_json fr;
  fr["max_r"] = max_r.sizes();
  fr["exact"] = ordered_json::array();
  fr["bound_limited"] = ordered_json::array();
  for (const auto& e : f.exact) {
    out << "exactly " << e.str() << "-extendible (Inside " << lambda_name(n, e);
    for (std::size_t i = 0; i < e.groups(); ++i) {
      auto up = e.sizes();
      ++up[i];
      out << (i ? ", " : "; Outside ") << lambda_name(n, DfpeOrder(up));
    }
    out << ")\n";
    fr["exact"].push_back(e.sizes());
  }
  for (const auto& e : f.bound_limited) {
    out << "extendible to " << e.str() << " at the search bound " << max_r.str() << "; bound too small\n";
    fr["bound_limited"].push_back(e.sizes());
  }
  report["frontier"] = fr;
  return f.bound_too_small() ? kBoundTooSmall : kOk;
}

int extend_me(const MeDistribution& d, const ExtendArgs& a, std::ostream& out, ordered_json& report) {
  const int n = d.length();
  report["length"] = n;
  const GammaPoint g = gamma_from_weights(d);
  for (const auto& spec : a.r) {
    const int r = single_tuple(spec).at(0);
    if (single_tuple(spec).size() != 1 || r < n) {
      throw Error(ErrorKind::InvalidArgument, "--r " + spec + " must be a length >= " + std::to_string(n));
    }
    auto rec = report_verdict(gamma_name(n, r), "length " + std::to_string(r), me_extendible(g, r), g.to_point(),
                              gamma_extension_vertices(n, r), out);
    rec["r"] = r;
    report["results"].push_back(rec);
  }
  if (!a.frontier) return kOk;
  const auto bound = single_tuple(join_tokens(a.max_r));
  if (bound.size() != 1 || bound[0] < n) throw Error(ErrorKind::InvalidArgument, "--max-r must be a length >= " + std::to_string(n));
  // Extendibility is closed downwards, so scan upwards until the first failure.
  int best = n;
  while (best < bound[0] && me_extendible(g, best + 1).inside()) ++best;
  ordered_json fr;
  fr["max_r"] = bound[0];
  if (best == bound[0]) {
    out << "extendible to length " << best << " at the search bound; bound too small\n";
    fr["bound_limited"] = best;
    report["frontier"] = fr;
    return kBoundTooSmall;
  }
  out << "exactly " << best << "-extendible (Inside " << gamma_name(n, best) << "; Outside " << gamma_name(n, best + 1)
      << ")\n";
  fr["exact"] = best;
  report["frontier"] = fr;
  return kOk;
}

int cmd_extend(const ExtendArgs& a, std::istream& in, std::ostream& out) {
  if (a.r.empty() && !a.frontier) throw Error(ErrorKind::InvalidArgument, "give --r or --frontier");
  if (a.frontier && a.max_r.empty()) throw Error(ErrorKind::InvalidArgument, "--frontier needs --max-r");
  auto loaded = parse_distribution(read_text(a.input, in));
  ordered_json report;
  int code = kOk;
  std::ostringstream text;
  if (const auto* d = std::get_if<DfpeDistribution>(&loaded)) {
    report = header("dfpe");
    report["results"] = ordered_json::array();
    code = extend_dfpe(*d, a, text, report);
  } else if (const auto* m = std::get_if<MeDistribution>(&loaded)) {
    report = header("me");
    report["results"] = ordered_json::array();
    code = extend_me(*m, a, text, report);
  } else {
    throw Error(ErrorKind::InvalidArgument, "extend needs a dfpe or me document");
  }
  if (a.json_path == "-") {
    out << report.dump() << "\n";
  } else {
    out << text.str();
    if (!a.json_path.empty()) write_text(a.json_path, out, report.dump() + "\n");
  }
  return code;
}

struct VolumeArgs {
  std::string kind, n, r, output = "-";
  std::uint64_t samples = 10000;
  std::uint64_t seed = VolumeOptions{}.seed;
  unsigned workers = 1;
};

int cmd_volume_table(const VolumeArgs& a, std::ostream& out) {
  VolumeOptions options;
  options.samples = a.samples;
  options.seed = a.seed;
  options.workers = resolve_workers(a.workers);
  std::ostringstream csv;
  csv << "n,r,ratio,std_error,samples,seed\n";
  std::size_t rows = 0;
  for (const auto& n : expand_ranges(a.n)) {
    for (const auto& r : expand_ranges(a.r)) {
      if (n.size() != r.size()) throw Error(ErrorKind::InvalidArgument, "--n and --r have different group counts");
      VolumeEstimate e;
      if (a.kind == "me") {
        if (n.size() != 1) throw Error(ErrorKind::InvalidArgument, "--kind me takes scalar lengths");
        if (n[0] < 2) throw Error(ErrorKind::InvalidArgument, "--kind me needs n >= 2");
        if (r[0] < n[0]) continue;
        e = me_volume_ratio(n[0], r[0], options);
      } else {
        DfpeOrder no(n), ro(r);
        if (!no.within(ro)) continue;
        e = dfpe_volume_ratio(no, ro, options);
      }
      csv << csv_tuple(n) << ',' << csv_tuple(r) << ',' << std::fixed << std::setprecision(6) << e.ratio << ','
          << e.std_error << ',' << e.samples << ',' << e.seed << '\n';
      ++rows;
    }
  }
  if (rows == 0) throw Error(ErrorKind::InvalidArgument, "no (n, r) pair with r >= n");
  write_text(a.output, out, csv.str());
  return kOk;
}

struct EnumerateArgs {
  int n = 0;
  bool counts = false;
};

int cmd_me_enumerate(const EnumerateArgs& a, std::ostream& out) {
  const PhiSets phi = enumerate_phi(a.n);
  out << "Φ(0," << a.n << "): " << phi.first_kind.size() << " of the first kind, " << phi.second_kind.size()
      << " of the second kind\n";
  Integer sequences = 0;
  for (const auto& m : phi.all()) {
    out << "kind " << m.kind() << "  " << format_tcm(m) << "  ends " << ending_state(m);
    if (a.counts) out << "  count " << whittle_count(m).get_str();
    out << "\n";
    sequences += whittle_count(m);
  }
  const Integer expected = 1 + binom(a.n, 2);
  if (Integer(phi.size()) != expected) throw Error(ErrorKind::InvalidArgument, "matrix total disagrees with 1 + C(n,2)");
  out << "total " << phi.size() << " = 1 + C(" << a.n << ",2)\n";
  if (a.counts) {
    Integer all = 1;
    all <<= static_cast<mp_bitcnt_t>(a.n - 1);
    if (sequences != all) throw Error(ErrorKind::InvalidArgument, "class counts do not sum to 2^(n-1)");
    out << "sequences " << sequences.get_str() << " = 2^" << a.n - 1 << "\n";
  }
  return kOk;
}

void print_conditions(const InfiniteReport& rep, const std::vector<std::string>& group_names, std::ostream& out) {
  if (rep.even_cov_violations.empty()) {
    out << "even central moments: PASS\n";
  } else {
    out << "even central moments: FAIL at";
    for (const auto& k : rep.even_cov_violations) out << " " << format_index(k);
    out << "\n";
  }
  if (rep.matrix.empty()) {
    out << "PSD: not applicable (no group of size >= 2)\n";
  } else {
    out << "covariance matrix over";
    for (auto g : rep.matrix_groups) out << " " << group_names[g];
    out << ":\n";
    for (const auto& row : rep.matrix) out << "  " << format_vector(row) << "\n";
    out << "PSD: " << (rep.psd ? "PASS" : "FAIL") << " (det = " << format_rational(rep.det) << ")\n";
  }
}

int cmd_check_infinite(const std::string& input, std::istream& in, std::ostream& out) {
  auto loaded = parse_distribution(read_text(input, in));
  out << "necessary conditions only: passing does not establish infinite extendibility\n";
  if (const auto* d = std::get_if<DfpeDistribution>(&loaded)) {
    const auto cv = covariances_from_moments(moments_from_weights(*d));
    const auto rep = check_infinite_necessary(cv);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < d->order().groups(); ++i) names.push_back("group" + std::to_string(i + 1));
    out << "order " << d->order().str() << ", means " << format_vector(cv.means()) << "\n";
    print_conditions(rep, names, out);
    std::string infinite = "(";
    for (std::size_t i = 0; i < d->order().groups(); ++i) infinite += i ? ",∞" : "∞";
    infinite += ")";
    out << (rep.passes() ? "verdict: no violation found" : "verdict: not " + infinite + "-extendible") << "\n";
    return kOk;
  }
  const auto* mixed = std::get_if<MeMixedFile>(&loaded);
  if (!mixed) throw Error(ErrorKind::InvalidArgument, "Markov laws need the me-mixed document (both start states)");
  const PairMap m = me_mixed_moments(mixed->input);
  const auto rep = me_infinite_necessary(m, mixed->length);
  out << "mixed moments m(a,b) of (theta00, theta11):\n";
  for (const auto& [ab, v] : m) out << "  m(" << ab.first << "," << ab.second << ") = " << format_rational(v) << "\n";
  out << "means " << format_rational(rep.mean00) << ", " << format_rational(rep.mean11) << "\n";
  print_conditions(rep.conditions, {"theta00", "theta11"}, out);
  out << (rep.conditions.passes() ? "verdict: no violation found" : "verdict: not infinitely extendible") << "\n";
  return kOk;
}

}  // namespace

Loaded parse_distribution(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(e.what());
  }
  if (!doc.is_object()) parse_fail("document must be a JSON object");
  if (!doc.contains("schema_version") || doc["schema_version"] != kSchemaVersion) parse_fail("schema_version must be 1");
  if (!doc.contains("kind") || !doc["kind"].is_string()) parse_fail("missing \"kind\"");
  const std::string kind = doc["kind"];
  const std::string rep = doc.value("representation", std::string("weights"));

  if (kind == "dfpe") {
    if (!doc.contains("order") || !doc["order"].is_array()) parse_fail("missing array \"order\"");
    DfpeOrder order(doc["order"].get<std::vector<int>>());
    auto values = json_rationals(doc, "values");
    if (rep == "weights") return validate_dfpe(std::move(values), order);
    if (rep == "moments") return weights_from_moments(MomentVector(order, std::move(values)));
    if (rep == "covariances") {
      CovarianceVector cv(order, json_rationals(doc, "means"), std::move(values));
      return weights_from_moments(moments_from_covariances(cv));
    }
    parse_fail("unknown dfpe representation \"" + rep + "\"");
  }
  if (kind == "me") {
    const int n = json_int(doc, "length");
    auto values = json_rationals(doc, "values");
    if (rep == "weights") return validate_me(n, std::move(values));
    if (rep == "gamma") return weights_from_gamma(GammaPoint(n, std::move(values)));
    parse_fail("unknown me representation \"" + rep + "\"");
  }
  if (kind == "me-mixed") {
    const int n = json_int(doc, "length");
    if (!doc.contains("q0") || !doc.contains("q1")) parse_fail("me-mixed needs q0 and q1");
    return MeMixedFile{n, MixedMomentInput{json_rational(doc["q0"]), json_rational(doc["q1"]),
                                           GammaPoint(n, json_rationals(doc, "w0")), json_rationals(doc, "p1_blocks")}};
  }
  parse_fail("unknown kind \"" + kind + "\"");
}

std::string dfpe_document(const DfpeDistribution& d) {
  auto doc = header("dfpe");
  doc["order"] = d.order().sizes();
  doc["representation"] = "weights";
  doc["values"] = rational_array(d.weights());
  return doc.dump();
}

std::string dfpe_document(const MomentVector& mv) {
  auto doc = header("dfpe");
  doc["order"] = mv.order().sizes();
  doc["representation"] = "moments";
  doc["values"] = rational_array(mv.values());
  return doc.dump();
}

std::string dfpe_document(const CovarianceVector& cv) {
  auto doc = header("dfpe");
  doc["order"] = cv.order().sizes();
  doc["representation"] = "covariances";
  doc["means"] = rational_array(cv.means());
  doc["values"] = rational_array(cv.covariances());
  return doc.dump();
}

std::string me_document(const MeDistribution& d) {
  auto doc = header("me");
  doc["length"] = d.length();
  doc["representation"] = "weights";
  doc["values"] = rational_array(d.weights());
  return doc.dump();
}

std::string me_document(const GammaPoint& g) {
  auto doc = header("me");
  doc["length"] = g.length();
  doc["representation"] = "gamma";
  doc["values"] = rational_array(g.values());
  return doc.dump();
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact extendibility checks for partially exchangeable and Markov exchangeable binary laws", "exchkit"};
  app.require_subcommand(1);

  TransformArgs transform;
  auto* t = app.add_subcommand("dfpe-transform", "Convert a DFPE law between weights, moments and covariances");
  t->add_option("input", transform.input, "Input document, - for stdin")->required();
  t->add_option("--to", transform.to, "Target representation")
      ->required()
      ->check(CLI::IsMember({"weights", "moments", "covariances"}));
  t->add_option("-o,--output", transform.output, "Output path, - for stdout");

  ExtendArgs extend;
  auto* e = app.add_subcommand("extend", "Decide extendibility to longer sequences");
  e->add_option("input", extend.input, "Input document, - for stdin")->required();
  e->add_option("--r", extend.r, "Target order (e.g. 4,2) or length; repeatable");
  e->add_flag("--frontier", extend.frontier, "Search the maximal extendible orders up to --max-r");
  e->add_option("--max-r", extend.max_r, "Search bound, e.g. 8,8 or 8 8");
  e->add_option("--json", extend.json_path, "Also write a JSON report (- prints only JSON)");

  VolumeArgs volume;
  auto* v = app.add_subcommand("volume-table", "Monte Carlo volume fraction of extendible laws");
  v->add_option("--kind", volume.kind)->required()->check(CLI::IsMember({"me", "dfpe"}));
  v->add_option("--n", volume.n, "Length or order; ranges like 4..5 or 1..2,1")->required();
  v->add_option("--r", volume.r, "Target lengths or orders, same syntax")->required();
  v->add_option("--samples", volume.samples)->check(CLI::PositiveNumber);
  v->add_option("--seed", volume.seed);
  v->add_option("--workers", volume.workers, "Worker threads (EXCHKIT_WORKERS overrides)");
  v->add_option("-o,--output", volume.output, "CSV path, - for stdout");

  EnumerateArgs enumerate;
  auto* m = app.add_subcommand("me-enumerate", "List the transition-count classes of length-n sequences from 0");
  m->add_option("--n", enumerate.n)->required()->check(CLI::PositiveNumber);
  m->add_flag("--counts", enumerate.counts, "Show the number of sequences in each class");

  std::string infinite_input;
  auto* c = app.add_subcommand("check-infinite", "Necessary conditions for infinite extendibility");
  c->add_option("input", infinite_input, "Input document, - for stdin")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& error) {
    return app.exit(error, out, err) == 0 ? kOk : kValidation;
  }

  try {
    if (t->parsed()) return cmd_dfpe_transform(transform, in, out);
    if (e->parsed()) return cmd_extend(extend, in, out);
    if (v->parsed()) return cmd_volume_table(volume, out);
    if (m->parsed()) return cmd_me_enumerate(enumerate, out);
    return cmd_check_infinite(infinite_input, in, out);
  } catch (const Error& error) {
    err << "error: " << error.what() << "\n";
    return kValidation;
  }
}

}  // namespace exchkit::cli
