#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "aflib/envelope.hpp"
#include "aflib/experiments.hpp"
#include "aflib/json_io.hpp"
#include "aflib/measure.hpp"
#include "aflib/projection.hpp"
#include "aflib/wave_cone.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using aflib::json;

Eigen::VectorXd parse_vec(const std::string& csv) {
  std::vector<double> vals;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

void emit(const json& result, const json& config, std::uint64_t seed, const std::string& out) {
  json report;
  report["schema"] = 1;
  report["tool"] = "afree";
  report["version"] = kVersion;
  report["seed"] = seed;
  report["config"] = config;
  report["result"] = result;
  std::string text = aflib::dump_canonical(report);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) aflib::fail("IoError", "cannot open for writing: " + out);
    f << text;
  }
}

aflib::OperatorSpec load_op(const std::string& path) {
  return aflib::OperatorSpec::parse(aflib::read_json_file(path).dump());
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) aflib::fail("IoError", "cannot open for writing: " + path);
  f << header << "\n";
  for (const auto& r : rows) f << r << "\n";
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for PDE-constrained vector measures"};
  app.require_subcommand(1);
  std::string out_path;
  std::uint64_t seed = 1;
  app.add_option("--out", out_path, "write the JSON report here (default stdout)");
  app.add_option("--seed", seed, "seed for randomized stages");

  // operator-check
  auto* opcheck = app.add_subcommand("operator-check", "parse an operator and verify constant rank");
  std::string oc_op;
  int oc_samples = 0;
  opcheck->add_option("--op", oc_op, "operator spec file")->required();
  opcheck->add_option("--samples", oc_samples, "sphere sample count");

  // wavecone scan
  auto* wc = app.add_subcommand("wavecone", "wave cone scans");
  auto* wc_scan = wc->add_subcommand("scan", "rank / membership scan over the sphere");
  std::string wc_op, wc_P, wc_csv;
  int wc_samples = 0;
  wc_scan->add_option("--op", wc_op, "operator spec file")->required();
  wc_scan->add_option("--P", wc_P, "query vector, comma separated");
  wc_scan->add_option("--samples", wc_samples, "sphere sample count");
  wc_scan->add_option("--csv", wc_csv, "dump per-sample rows (xi, rank, residual)");

  // project
  auto* proj = app.add_subcommand("project", "A-free spectral projection of a periodic field");
  std::string pr_op, pr_field, pr_out_field, pr_csv_field;
  int pr_csv_m1 = 0, pr_csv_m2 = 0, pr_csv_n = 1;
  proj->add_option("--op", pr_op, "operator spec file")->required();
  proj->add_option("--field", pr_field, "input field (binary format)");
  proj->add_option("--csv-field", pr_csv_field, "input field as CSV (d=2): i,j,v1..vN");
  proj->add_option("--csv-m1", pr_csv_m1, "CSV grid rows");
  proj->add_option("--csv-m2", pr_csv_m2, "CSV grid cols");
  proj->add_option("--csv-n", pr_csv_n, "CSV component count");
  proj->add_option("--out-field", pr_out_field, "write the projected field here");

  // norm
  auto* nrm = app.add_subcommand("norm", "negative Sobolev norm of a zero-mean field");
  std::string nm_field;
  int nm_k = 1;
  double nm_q = 2.0;
  nrm->add_option("--field", nm_field, "input field (binary format)")->required();
  nrm->add_option("--k", nm_k, "derivative order");
  nrm->add_option("--q", nm_q, "integrability exponent");

  // envelope
  auto* env = app.add_subcommand("envelope", "A-quasiconvex envelope estimate");
  std::string en_op, en_f, en_params = "{}", en_A0, en_dir, en_trace, en_argmin;
  int en_grid = 64, en_restarts = 8, en_iters = 500;
  bool en_recession = false;
  env->add_option("--op", en_op, "operator spec file")->required();
  env->add_option("--f", en_f, "integrand name")->required();
  env->add_option("--params", en_params, "integrand parameters (JSON)");
  env->add_option("--A0", en_A0, "base point, comma separated")->required();
  env->add_option("--grid", en_grid, "grid resolution per axis");
  env->add_option("--restarts", en_restarts, "restart count");
  env->add_option("--iters", en_iters, "max iterations per restart");
  env->add_flag("--recession", en_recession, "estimate the envelope recession along --dir");
  env->add_option("--dir", en_dir, "direction for --recession");
  env->add_option("--trace", en_trace, "write the objective trace CSV here");
  env->add_option("--argmin", en_argmin, "write the argmin corrector field here");

  // measure-eval
  auto* mev = app.add_subcommand("measure-eval", "evaluate a functional on a measure");
  std::string me_f, me_params = "{}", me_mu;
  mev->add_option("--f", me_f, "integrand name")->required();
  mev->add_option("--params", me_params, "integrand parameters (JSON)");
  mev->add_option("--mu", me_mu, "measure file")->required();

  // experiment
  auto* exp = app.add_subcommand("experiment", "end-to-end verification pipelines");
  auto* exp_lsc = exp->add_subcommand("lsc", "lower semicontinuity experiment");
  auto* exp_relax = exp->add_subcommand("relax", "relaxation recovery experiment");
  auto* exp_jensen = exp->add_subcommand("jensen", "Jensen inequality check");
  std::string ex_config, ex_csv;
  for (auto* sc : {exp_lsc, exp_relax, exp_jensen}) {
    sc->add_option("--config", ex_config, "experiment config file")->required();
    sc->add_option("--csv", ex_csv, "write the per-index series here");
  }

  // global --out/--seed may appear after the subcommand flags
  for (CLI::App* sc : {opcheck, wc, wc_scan, proj, nrm, env, mev, exp, exp_lsc, exp_relax,
                       exp_jensen})
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*opcheck) {
      aflib::OperatorSpec op = load_op(oc_op);
      aflib::SphereSampling s = aflib::SphereSampling::standard(op.d(), oc_samples, seed);
      aflib::RankProfile prof = aflib::rank_profile(op, s);
      aflib::SpanResult span = aflib::wavecone_span(op, s);
      json res;
      res["constant_rank"] = prof.is_constant;
      res["rank"] = prof.min_rank;
      res["max_rank"] = prof.max_rank;
      res["homogeneous"] = op.homogeneous();
      res["span_dim"] = span.dim;
      res["canonical"] = json::parse(op.print());
      emit(res, {{"op", oc_op}, {"samples", s.count()}}, seed, out_path);
      return prof.is_constant ? 0 : 1;
    }

    if (*wc_scan) {
      aflib::OperatorSpec op = load_op(wc_op);
      aflib::SphereSampling s = aflib::SphereSampling::standard(op.d(), wc_samples, seed);
      aflib::RankProfile prof = aflib::rank_profile(op, s);
      json res;
      res["rank_min"] = prof.min_rank;
      res["rank_max"] = prof.max_rank;
      res["constant_rank"] = prof.is_constant;
      bool has_P = !wc_P.empty();
      Eigen::VectorXd P;
      aflib::WaveConeReport rep;
      if (has_P) {
        P = parse_vec(wc_P);
        rep = aflib::wavecone_membership(op, P, s);
        res["membership"] = {{"member", rep.member},
                             {"residual", rep.residual},
                             {"witness_xi", aflib::vector_to_json(rep.witness_xi)}};
      }
      if (!wc_csv.empty()) {
        std::vector<std::string> rows;
        for (size_t i = 0; i < s.points.size(); ++i) {
          std::ostringstream row;
          for (Eigen::Index c = 0; c < s.points[i].size(); ++c)
            row << fmt17(s.points[i](c)) << ",";
          row << prof.ranks[i] << ",";
          row << (has_P ? fmt17(aflib::symbol_residual(op, P, s.points[i])) : "");
          rows.push_back(row.str());
        }
        std::string hdr;
        for (int c = 0; c < op.d(); ++c) hdr += "xi" + std::to_string(c + 1) + ",";
        write_csv(wc_csv, hdr + "rank,residual", rows);
        res["csv"] = wc_csv;
      }
      emit(res, {{"op", wc_op}, {"P", wc_P}, {"samples", s.count()}}, seed, out_path);
      return 0;
    }

    if (*proj) {
      aflib::OperatorSpec op = load_op(pr_op);
      aflib::PeriodicField u;
      if (!pr_field.empty())
        u = aflib::read_field(pr_field);
      else if (!pr_csv_field.empty())
        u = aflib::read_field_csv(pr_csv_field, pr_csv_m1, pr_csv_m2, pr_csv_n);
      else
        aflib::fail("ParseError", "project needs --field or --csv-field");
      auto table = aflib::build_projector_table(op, u.grid);
      aflib::ProjectionStats stats;
      aflib::PeriodicField pu = aflib::project_afree(*table, u, &stats);
      json res;
      res["input_residual"] = aflib::afree_residual(op, u);
      res["output_residual"] = aflib::afree_residual(op, pu);
      res["imag_residue"] = stats.imag_residue;
      res["l2_change"] = (pu.values - u.values).norm() * std::sqrt(u.dx());
      res["output_mean"] = aflib::vector_to_json(pu.mean());
      if (!pr_out_field.empty()) {
        aflib::write_field(pr_out_field, pu);
        res["out_field"] = pr_out_field;
      }
      emit(res, {{"op", pr_op}, {"field", pr_field}}, seed, out_path);
      return 0;
    }

    if (*nrm) {
      aflib::PeriodicField u = aflib::read_field(nm_field);
      double v = aflib::sobolev_negative_norm(u, nm_k, nm_q);
      emit({{"norm", v}}, {{"field", nm_field}, {"k", nm_k}, {"q", nm_q}}, seed, out_path);
      return 0;
    }

    if (*env) {
      aflib::OperatorSpec op = load_op(en_op);
      aflib::Integrand f = aflib::make_integrand(en_f, json::parse(en_params), op.N());
      Eigen::VectorXd A0 = parse_vec(en_A0);
      aflib::EnvelopeConfig cfg;
      cfg.grid.assign(op.d(), en_grid);
      cfg.restarts = en_restarts;
      cfg.max_iters = en_iters;
      cfg.seed = seed;
      Eigen::VectorXd x0 = Eigen::VectorXd::Zero(op.d());
      json res;
      json config = {{"op", en_op},      {"f", en_f},           {"params", json::parse(en_params)},
                     {"A0", en_A0},      {"grid", en_grid},     {"restarts", en_restarts},
                     {"iters", en_iters}};
      if (en_recession) {
        if (en_dir.empty()) aflib::fail("ParseError", "--recession needs --dir");
        Eigen::VectorXd dir = parse_vec(en_dir);
        dir.normalize();
        aflib::RecessionEstimate est =
            aflib::envelope_recession(op, f, x0, dir, {4, 8, 16, 32}, cfg);
        res["recession_upper"] = est.upper;
        res["recession_lower"] = est.lower;
        res["exists"] = est.exists;
        config["dir"] = en_dir;
      } else {
        aflib::EnvelopeResult r = aflib::quasiconvex_envelope(op, f, x0, A0, cfg);
        res["value"] = r.value;
        res["f_at_A0"] = f(x0, A0);
        res["argmin_afree_residual"] = aflib::afree_residual(op, r.argmin_field);
        res["argmin_mean"] = aflib::vector_to_json(r.argmin_field.mean());
        json rs = json::array();
        for (const auto& s : r.restarts_summary)
          rs.push_back({{"restart", s.restart}, {"init", s.init}, {"value", s.value},
                        {"iters", s.iters}});
        res["restarts"] = rs;
        if (!en_trace.empty()) {
          std::vector<std::string> rows;
          for (size_t i = 0; i < r.trace.size(); ++i)
            rows.push_back(std::to_string(i) + "," + fmt17(r.trace[i]));
          write_csv(en_trace, "iter,objective", rows);
          res["trace_file"] = en_trace;
        }
        if (!en_argmin.empty()) {
          aflib::write_field(en_argmin, r.argmin_field);
          res["argmin_field"] = en_argmin;
        }
      }
      emit(res, config, seed, out_path);
      return 0;
    }

    if (*mev) {
      aflib::GridMeasure mu = aflib::read_measure_file(me_mu);
      aflib::Integrand f = aflib::make_integrand(me_f, json::parse(me_params), mu.N);
      json res;
      res["value"] = aflib::evaluate_functional(f, mu);
      res["area"] = aflib::area_functional(mu);
      res["total_variation"] = mu.total_variation();
      emit(res, {{"f", me_f}, {"mu", me_mu}}, seed, out_path);
      return 0;
    }

    if (*exp_lsc || *exp_relax || *exp_jensen) {
      json cfg = aflib::read_json_file(ex_config);
      if (!cfg.contains("seed")) cfg["seed"] = seed;
      json rep;
      if (*exp_lsc)
        rep = aflib::lsc_experiment(cfg);
      else if (*exp_relax)
        rep = aflib::relaxation_experiment(cfg);
      else
        rep = aflib::jensen_check(cfg);
      if (!ex_csv.empty()) {
        std::vector<std::string> rows;
        if (*exp_lsc) {
          auto js = rep["j_list"];
          for (size_t i = 0; i < js.size(); ++i)
            rows.push_back(std::to_string(js[i].get<int>()) + "," +
                           fmt17(rep["F_j"][i]["value"].get<double>()) + "," +
                           fmt17(rep["afree_residual_j"][i].get<double>()));
          write_csv(ex_csv, "j,F_j,residual_j", rows);
        } else if (*exp_relax) {
          for (const auto& p : rep["pairs"])
            rows.push_back(std::to_string(p["m"].get<int>()) + "," +
                           std::to_string(p["j"].get<int>()) + "," +
                           fmt17(p["G"].get<double>()));
          write_csv(ex_csv, "m,j,G", rows);
        }
        rep["csv"] = ex_csv;
      }
      emit(rep, cfg, seed, out_path);
      std::string verdict = rep.value("verdict", "pass");
      return (verdict == "pass" || verdict == "expected-fail") ? 0 : 1;
    }
  } catch (const aflib::Error& e) {
    json err;
    err["error"] = {{"kind", e.kind()}, {"message", e.what()}};
    emit(err, json::object(), seed, out_path);
    return 1;
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"kind", "InternalError"}, {"message", e.what()}};
    emit(err, json::object(), seed, out_path);
    return 1;
  }
  return 2;
}
