#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "igw/igw.hpp"

using namespace igw;

namespace {

struct SpecOptions {
  ExperimentSpec spec;
  std::vector<CLI::Option*> opts;
  std::vector<std::function<void(ExperimentSpec&)>> apply;

  template <class T>
  void add(CLI::App* app, const std::string& flag, T ExperimentSpec::*field, const std::string& help) {
    auto* o = app->add_option(flag, spec.*field, help);
    opts.push_back(o);
    apply.push_back([this, o, field](ExperimentSpec& s) {
      if (o->count()) s.*field = spec.*field;
    });
  }

  void attach(CLI::App* app) {
    add(app, "--dist", &ExperimentSpec::dist, "offspring law: igw:q | igw:a/b | binary | zipf:alpha | geometric[:r] | table:path");
    add(app, "--lambda", &ExperimentSpec::lambda, "edge rate");
    add(app, "--phi", &ExperimentSpec::phi, "pruning functional: height | length | leaves | ord | horton");
    add(app, "--t", &ExperimentSpec::thresholds, "pruning thresholds");
    add(app, "--p", &ExperimentSpec::p_targets, "target survival probabilities");
    add(app, "--n", &ExperimentSpec::replicates, "replicates (trees or survivors, per experiment)");
    add(app, "--seed", &ExperimentSpec::seed, "master seed");
    add(app, "--seeds", &ExperimentSpec::seeds, "repetitions voted by majority");
    add(app, "--budget", &ExperimentSpec::budget, "node budget per tree");
    add(app, "--tolerance", &ExperimentSpec::tolerance, "acceptance tolerance");
    add(app, "--max-censor-rate", &ExperimentSpec::max_censor_rate, "largest admissible censoring rate");
    add(app, "--series-cap", &ExperimentSpec::series_cap, "largest lambda*q*x for the length series");
    add(app, "--prec-bits", &ExperimentSpec::prec_bits, "fixed working precision (0 = automatic)");
    add(app, "--horton-steps", &ExperimentSpec::horton_steps, "Horton prunings for phi=horton");
    add(app, "--expected", &ExperimentSpec::expected, "reference attractor parameter");
    add(app, "--threads", &ExperimentSpec::threads, "worker threads (0 = all cores)");
    add(app, "--out-dir", &ExperimentSpec::out_dir, "directory for JSON/CSV reports");
  }

  ExperimentSpec resolve(const std::string& name) {
    ExperimentSpec s = default_spec(name);
    for (auto& f : apply) f(s);
    s.name = name;
    return s;
  }
};

int print_report(const ExperimentReport& rep) {
  std::cout << rep.to_json().dump(2) << "\n";
  std::cerr << rep.name << ": " << (rep.pass() ? "pass" : "fail") << " (" << rep.seconds << " s)\n";
  return rep.pass() ? 0 : 1;
}

std::vector<MetricTree> read_trees(const std::string& path) {
  if (path == "-") return read_newick(std::cin);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_newick(in);
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

std::vector<double> parse_grid(const std::string& g) {
  double a, b, h;
  char c1, c2;
  std::istringstream in(g);
  if (!(in >> a >> c1 >> b >> c2 >> h) || c1 != ':' || c2 != ':' || !(h > 0.0) || b < a)
    throw std::invalid_argument("grid must be start:stop:step");
  std::vector<double> xs;
  for (long i = 0; a + double(i) * h <= b + 1e-12 * std::max(1.0, std::abs(b)); ++i) xs.push_back(a + double(i) * h);
  return xs;
}

void write_pruned(std::ostream& out, std::ostream* log, const std::vector<MetricTree>& trees,
                  const std::function<PrunedResult(const MetricTree&, std::size_t)>& op) {
  if (log) *log << "tree,vertex,kept\n";
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const auto r = op(trees[i], i);
    out << to_newick(r.tree) << "\n";
    if (log)
      for (const auto& c : r.cuts) *log << i << "," << c.vertex << "," << format_length(c.kept) << "\n";
  }
}

// Splices the items of `report --config file` in after the verb; flags given on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  const auto verb = std::find(args.begin(), args.end(), "report");
  if (verb == args.end()) return args;
  const auto flag = std::find(verb, args.end(), "--config");
  if (flag == args.end() || flag + 1 == args.end()) return args;
  std::ifstream in(*(flag + 1));
  if (!in) throw CLI::FileError::Missing(*(flag + 1));
  std::vector<std::string> items;
  for (const auto& item : CLI::ConfigTOML().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string key = "--" + item.fullname();
    if (std::find(verb, args.end(), key) != args.end()) continue;
    items.push_back(key);
    items.insert(items.end(), item.inputs.begin(), item.inputs.end());
  }
  const auto at = std::distance(args.begin(), verb) + 1;
  args.erase(flag, flag + 2);
  args.insert(args.begin() + at, items.begin(), items.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant Galton-Watson tree laboratory"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "draw Galton-Watson trees");
  std::string s_dist = "igw:0.5", s_out = "-";
  std::optional<double> s_lambda;
  std::uint64_t s_n = 1000, s_seed = 42, s_budget = 1'000'000;
  unsigned s_threads = 0;
  sample->add_option("--dist", s_dist, "offspring law");
  sample->add_option("--lambda", s_lambda, "edge rate (omit for shapes with unit lengths)");
  sample->add_option("--n", s_n, "number of trees");
  sample->add_option("--seed", s_seed, "master seed");
  sample->add_option("--budget", s_budget, "node budget");
  sample->add_option("--threads", s_threads, "worker threads");
  sample->add_option("--out", s_out, "trees.newick, stats.json or - for stdout");

  // prune
  auto* prune = app.add_subcommand("prune", "generalized dynamical pruning of Newick trees");
  std::string p_phi = "height", p_in = "-", p_out = "-", p_log;
  double p_t = 0.0;
  prune->add_option("--phi", p_phi, "height | length | leaves | ord")->required();
  prune->add_option("--t", p_t, "threshold")->required();
  prune->add_option("--in", p_in, "input Newick file");
  prune->add_option("--out", p_out, "output Newick file");
  prune->add_option("--log", p_log, "CSV log of cut points");

  // color
  auto* color = app.add_subcommand("color", "Bernoulli leaf coloring of Newick trees");
  double c_p = 0.5;
  std::uint64_t c_seed = 7;
  std::string c_in = "-", c_out = "-";
  color->add_option("--p", c_p, "probability that a leaf is not selected")->required();
  color->add_option("--seed", c_seed, "seed of the coloring stream");
  color->add_option("--in", c_in, "input Newick file");
  color->add_option("--out", c_out, "output Newick file");

  // dist
  auto* dist = app.add_subcommand("dist", "tabulate height, length or size laws");
  std::string d_what, d_grid = "0:10:0.1", d_out = "-", d_format = "csv";
  double d_q = 0.5, d_lambda = 1.0;
  long d_bits = 0;
  bool d_exact = false;
  dist->add_option("law", d_what, "height | length | size")->required()->check(CLI::IsMember({"height", "length", "size"}));
  dist->add_option("--q", d_q, "IGW parameter");
  dist->add_option("--lambda", d_lambda, "edge rate");
  dist->add_option("--x-grid", d_grid, "start:stop:step");
  dist->add_option("--prec-bits", d_bits, "fixed working precision");
  dist->add_flag("--exact", d_exact, "exact rationals for the size law (q = a/b)");
  dist->add_option("--out", d_out, "output file or - (csv/dat by --format)");
  dist->add_option("--format", d_format, "csv | dat")->check(CLI::IsMember({"csv", "dat"}));

  // experiment verbs
  SpecOptions verify_opts, inv_opts, att_opts, semi_opts, report_opts;
  auto* verify = app.add_subcommand("verify", "verify a closed-form law by Monte Carlo or identity checks");
  std::string v_what;
  verify->add_option("what", v_what,
                     "height | length | size | thinning | height-ode | length-series | length-tail | size-exact | "
                     "size-tail | lagrange | coloring")
      ->required();
  verify_opts.attach(verify);

  auto* inv = app.add_subcommand("invariance", "pruning invariance (IGW) or its falsification (other laws)");
  bool inv_falsify = false;
  inv->add_flag("--falsify", inv_falsify, "expect rejection for a non-IGW critical law");
  inv_opts.attach(inv);

  auto* att = app.add_subcommand("attractor", "attractor numerics (gf) or Monte Carlo (mc)");
  std::string a_mode = "gf";
  att->add_option("--mode", a_mode, "gf | mc")->check(CLI::IsMember({"gf", "mc"}));
  att_opts.attach(att);

  auto* semi = app.add_subcommand("semigroup", "semigroup property of S_t for height, ord and length");
  semi_opts.attach(semi);

  auto* report = app.add_subcommand("report", "run experiments named in a TOML-style config");
  std::vector<std::string> r_names;
  report->add_option("--experiments", r_names, "experiment names (default: the spec's name)");
  std::string r_name;
  report->add_option("--name", r_name, "single experiment name");
  std::string r_config;
  report->add_option("--config", r_config, "TOML-style key = value file mirroring the experiment spec");
  report_opts.attach(report);

  try {
    auto args = expand_config(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sample) {
      const auto d = OffspringDistribution::parse(s_dist);
      const bool json = s_out.size() > 5 && s_out.substr(s_out.size() - 5) == ".json";
      auto outs = map_replicates(
          0, s_n,
          [&](std::uint32_t r) {
            SampleConfig cfg{s_seed, r, s_budget, s_lambda.value_or(1.0)};
            std::optional<MetricTree> t;
            std::uint64_t nodes;
            bool cens;
            if (s_lambda) {
              auto o = sample_metric(d, cfg);
              t = o.tree, nodes = o.nodes, cens = o.censored;
            } else {
              auto o = sample_shape(d, cfg);
              nodes = o.nodes, cens = o.censored;
              if (o.tree) t = MetricTree::from_parents(o.tree->parents(), std::vector<double>(o.tree->vertex_count(), 1.0));
            }
            (void)nodes;
            return std::pair{t, cens};
          },
          s_threads);
      std::ofstream file;
      auto& out = open_out(s_out, file);
      if (json) {
        std::size_t cens = 0;
        std::vector<double> edges, heights, lengths;
        for (const auto& [t, c] : outs) {
          if (c) {
            ++cens;
            continue;
          }
          edges.push_back(double(t->edge_count()));
          heights.push_back(tree_height(*t));
          lengths.push_back(tree_length(*t));
        }
        auto quant = [](std::vector<double> v) {
          std::sort(v.begin(), v.end());
          nlohmann::json j;
          for (double f : {0.1, 0.5, 0.9, 0.99}) j[std::to_string(f).substr(0, 4)] = v.empty() ? 0.0 : v[std::size_t(f * (v.size() - 1))];
          return j;
        };
        nlohmann::json j{{"dist", d.name()},       {"n", s_n},           {"seed", s_seed},
                         {"budget", s_budget},     {"censored", cens},   {"edges_quantiles", quant(edges)},
                         {"code_version", code_version}};
        if (s_lambda) {
          j["lambda"] = *s_lambda;
          j["height_quantiles"] = quant(heights);
          j["length_quantiles"] = quant(lengths);
        }
        out << j.dump(2) << "\n";
      } else {
        out << "# dist=" << d.name() << " seed=" << s_seed << " budget=" << s_budget
            << (s_lambda ? " lambda=" + format_length(*s_lambda) : std::string(" shape-only unit lengths")) << "\n";
        for (std::size_t r = 0; r < outs.size(); ++r) {
          if (outs[r].second)
            out << "# censored replicate " << r << "\n";
          else
            out << to_newick(*outs[r].first) << "\n";
        }
      }
      return 0;
    }
    if (*prune) {
      const auto phi = PhiFunctional::by_name(p_phi);
      const auto trees = read_trees(p_in);
      std::ofstream file, logf;
      auto& out = open_out(p_out, file);
      if (!p_log.empty()) logf.open(p_log);
      write_pruned(out, p_log.empty() ? nullptr : &logf, trees,
                   [&](const MetricTree& t, std::size_t) { return gdp_prune(t, phi, p_t); });
      return 0;
    }
    if (*color) {
      const auto trees = read_trees(c_in);
      std::ofstream file;
      auto& out = open_out(c_out, file);
      write_pruned(out, nullptr, trees, [&](const MetricTree& t, std::size_t i) {
        Stream rng(c_seed, std::uint32_t(i), substream::coloring);
        return bernoulli_color(t, c_p, rng);
      });
      return 0;
    }
    if (*dist) {
      const auto xs = parse_grid(d_grid);
      SeriesPolicy policy;
      if (d_bits) policy.fixed_bits = d_bits;
      std::ofstream file;
      auto& out = open_out(d_out, file);
      const char* sep = d_format == "csv" ? "," : " ";
      out.precision(17);
      if (d_format == "dat") out << "# ";
      if (d_what == "height") {
        out << "x" << sep << "cdf\n";
        for (double x : xs) out << x << sep << height_cdf(d_q, d_lambda, x) << "\n";
      } else if (d_what == "length") {
        out << "x" << sep << "pdf" << sep << "cdf\n";
        LengthSeries series(d_q, d_lambda, xs.back(), policy);
        for (double x : xs) out << x << sep << series.pdf(x) << sep << series.cdf(x) << "\n";
      } else {
        out << "n" << sep << "pmf" << sep << "cdf\n";
        std::optional<std::pair<long, long>> rat;
        if (d_exact) {
          rat = as_rational(OffspringDistribution::igw(d_q));
          if (!rat) throw std::invalid_argument("--exact needs a rational q with denominator <= 64");
        }
        for (double x : xs) {
          const long n = long(std::floor(x));
          if (n < 1) continue;
          if (rat)
            out << n << sep << size_pmf_exact(rat->first, rat->second, n).get_d() << sep
                << size_cdf_exact(rat->first, rat->second, double(n)).get_d() << "\n";
          else
            out << n << sep << size_pmf(d_q, n, policy) << sep << size_cdf(d_q, double(n), policy) << "\n";
        }
      }
      return 0;
    }
    if (*verify) {
      static const std::map<std::string, std::string> alias{
          {"height", "verify-height"}, {"length", "verify-length"}, {"size", "verify-size"}};
      const auto name = alias.count(v_what) ? alias.at(v_what) : v_what;
      return print_report(run_experiment(verify_opts.resolve(name)));
    }
    if (*inv) return print_report(run_experiment(inv_opts.resolve(inv_falsify ? "uniqueness" : "invariance")));
    if (*att) return print_report(run_experiment(att_opts.resolve(a_mode == "gf" ? "attractor-gf" : "attractor-mc")));
    if (*semi) return print_report(run_experiment(semi_opts.resolve("semigroup")));
    if (*report) {
      if (r_names.empty() && !r_name.empty()) r_names.push_back(r_name);
      if (r_names.empty()) throw std::invalid_argument("report: set name or experiments");
      nlohmann::json all = nlohmann::json::array();
      bool ok = true;
      for (const auto& n : r_names) {
        const auto rep = run_experiment(report_opts.resolve(n));
        all.push_back({{"name", rep.name}, {"verdict", rep.pass() ? "pass" : "fail"}, {"seconds", rep.seconds}});
        std::cerr << rep.name << ": " << (rep.pass() ? "pass" : "fail") << "\n";
        ok = ok && rep.pass();
      }
      std::cout << all.dump(2) << "\n";
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
