// Acceptance suite. Each criterion prints one line,
//   PASS <name>: <detail>   or   FAIL <name>: <detail>
// and the process exits nonzero when the selected criterion fails.
//
// Usage: subjaudit_acceptance <criterion>|all

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "subjaudit/classify.hpp"
#include "subjaudit/embed.hpp"
#include "subjaudit/groundtruth.hpp"
#include "subjaudit/indicative.hpp"
#include "subjaudit/project.hpp"
#include "subjaudit/report.hpp"
#include "support.hpp"

using namespace subjaudit;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, x);
  return buf;
}

// Published (recall, precision, F1) rows.
struct PublishedRow {
  const char* label;
  double recall, precision, f1;
};

Outcome f1_table_reproduction() {
  const std::vector<std::pair<std::vector<PublishedRow>, double>> tables{
      {{{"Highest Poverty", 0.89, 0.75, 0.81},
        {"High Poverty", 0.43, 0.56, 0.49},
        {"Moderate Poverty", 0.42, 0.6, 0.5},
        {"Low Poverty", 0.23, 0.88, 0.36}},
       0.54},
      {{{"Grades PreK-2", 0.88, 0.89, 0.89},
        {"Grades 3-5", 0.83, 0.79, 0.81},
        {"Grades 6-8", 0.73, 0.82, 0.77},
        {"Grades 9-12", 0.89, 0.87, 0.88}},
       0.84}};
  Outcome out;
  std::ostringstream why;
  for (const auto& [rows, macro] : tables) {
    std::vector<PrecisionRecall> pairs;
    for (const auto& r : rows) pairs.push_back({r.label, r.precision, r.recall});
    const auto m = f1_metrics(pairs);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double diff = std::abs(m.per_label[i].f1 - rows[i].f1);
      if (diff > 0.005) {
        out.pass = false;
        why << rows[i].label << " computed " << fmt("%.4f", m.per_label[i].f1) << " vs printed "
            << fmt("%.2f", rows[i].f1) << "; ";
      }
    }
    const double dm = std::abs(m.macro_f1 - macro);
    if (dm > 0.005) {
      out.pass = false;
      why << "macro " << fmt("%.4f", m.macro_f1) << " vs " << fmt("%.2f", macro) << "; ";
    } else {
      why << "macro " << fmt("%.4f", m.macro_f1) << " ok vs " << fmt("%.2f", macro) << "; ";
    }
  }
  out.detail = why.str();
  return out;
}

Outcome chi2_oracle() {
  Rng rng(20240601);
  double worst = 0.0;
  int tables = 0;
  while (tables < 1000) {
    const std::size_t a = rng.below(501), b = rng.below(501), c = rng.below(501), d = rng.below(501);
    if (a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0) continue;  // degenerate margin
    const double ours = chi2({a, b, c, d});
    const double ref = oracle::pearson_chi2(double(a), double(b), double(c), double(d));
    const double rel = ref == 0.0 ? std::abs(ours) : std::abs(ours - ref) / ref;
    worst = std::max(worst, rel);
    ++tables;
  }
  return {worst < 1e-10, "1000 tables, worst relative error " + fmt("%.3g", worst)};
}

Outcome nfis_properties() {
  Rng rng(77);
  std::size_t checks = 0, failures = 0;
  for (int v = 0; v < 200; ++v) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<double> f(n);
    for (auto& x : f) {
      // mix of ties, zeros and spread values
      const double u = rng.uniform();
      x = u < 0.15 ? 0.0 : u < 0.3 ? 5.0 : 100.0 * rng.uniform();
    }
    if (*std::max_element(f.begin(), f.end()) == 0.0) f[0] = 1.0;
    const double scale = std::exp(8.0 * rng.uniform() - 4.0);
    std::vector<double> scaled(f);
    for (auto& x : scaled) x *= scale;
    double previous = 0.0;
    for (std::size_t K = 1; K <= n; ++K) {
      const double s = *nfis(f, K);
      const double t = *nfis(scaled, K);
      bool ok = s <= double(K) * (1 + 1e-15);
      ok = ok && s >= previous;
      ok = ok && std::abs(s - t) <= 1e-12 * s;
      ok = ok && std::abs(s - oracle::nfis(f, K)) <= 1e-12 * s;
      if (K == 1) ok = ok && s == 1.0;
      failures += !ok;
      previous = s;
      ++checks;
    }
  }
  return {failures == 0, std::to_string(checks) + " (vector, K) checks on 200 vectors, " + std::to_string(failures) +
                             " violations"};
}

AuditConfig preset_config(const std::string& preset, std::uint64_t seed) {
  AuditConfig cfg;
  cfg.synthetic = preset_by_name(preset);
  cfg.synthetic->n_docs = 5000;
  cfg.synthetic->vocab_noise = 2000;
  cfg.project.sample_cap = 1000;
  cfg.apply_seed(seed);
  cfg.validate();
  return cfg;
}

Outcome synthetic_detection_power() {
  Outcome out;
  std::ostringstream why;
  for (const std::string preset : {"objective", "subjective"}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = run_audit(preset_config(preset, 1));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& v = *report.classes.at(0).verdict;
    const double f1 = v.macro_f1.value_or(NAN), imb = v.imbalance.value_or(NAN);
    bool ok;
    if (preset == "objective") {
      ok = f1 >= 0.90 && imb <= 1.5 && v.kind == VerdictKind::objective_like;
    } else {
      ok = f1 <= 0.55 && imb >= 3.0 && v.kind == VerdictKind::subjective_suspect;
    }
    ok = ok && secs < 120.0;
    out.pass = out.pass && ok;
    why << preset << ": macro-F1 " << fmt("%.3f", f1) << ", imbalance " << fmt("%.2f", imb) << ", silhouette "
        << fmt("%.3f", v.silhouette.value_or(NAN)) << ", " << to_string(v.kind) << ", " << fmt("%.1f", secs) << " s; ";
  }
  out.detail = why.str();
  return out;
}

Outcome truth_matrix_fidelity() {
  Outcome out;
  std::ostringstream why;
  for (const std::string preset : {"subjective", "objective", "rating"}) {
    auto spec = preset_by_name(preset);
    spec.n_docs = 10000;
    const auto synth = generate_synthetic(spec);
    const auto reported = synth.corpus.labels(spec.target_class);
    const auto m = truth_matrix(synth.true_labels, reported, spec.labels);
    double worst = 0.0;
    for (std::size_t i = 0; i < spec.labels.size(); ++i) {
      for (std::size_t j = 0; j < spec.labels.size(); ++j) {
        worst = std::max(worst, std::abs(m(i, j) - 100.0 * spec.corruption(i, j)));
      }
    }
    out.pass = out.pass && worst <= 3.0;
    why << preset << " worst cell deviation " << fmt("%.2f", worst) << " pp; ";
  }
  out.detail = why.str();
  return out;
}

Outcome gradient_checks() {
  Rng rng(4242);
  double worst_pv = 0.0, worst_kl = 0.0;
  const int instances = 60;
  for (int t = 0; t < instances; ++t) {
    const std::size_t dim = 2 + rng.below(30), k = 1 + rng.below(8);
    const auto vec = [&] {
      std::vector<double> v(dim);
      for (auto& x : v) x = 0.5 * rng.normal();
      return v;
    };
    auto v = vec(), u = vec();
    std::vector<std::vector<double>> negs;
    for (std::size_t j = 0; j < k; ++j) negs.push_back(vec());
    std::vector<std::span<const double>> spans(negs.begin(), negs.end());
    const auto g = sg_neg_gradient(v, u, spans);
    const double h = 1e-6;
    const auto check = [&](double analytic, double up, double down) {
      const double fd = (up - down) / (2 * h);
      worst_pv = std::max(worst_pv, std::abs(analytic - fd) / std::max(std::abs(fd), 1e-6));
    };
    for (std::size_t i = 0; i < dim; ++i) {
      auto p = v, m = v;
      p[i] += h;
      m[i] -= h;
      check(g.doc[i], oracle::pair_loss(p, u, negs), oracle::pair_loss(m, u, negs));
      p = u;
      m = u;
      p[i] += h;
      m[i] -= h;
      check(g.target[i], oracle::pair_loss(v, p, negs), oracle::pair_loss(v, m, negs));
      for (std::size_t j = 0; j < k; ++j) {
        auto np = negs, nm = negs;
        np[j][i] += h;
        nm[j][i] -= h;
        check(g.negatives[j][i], oracle::pair_loss(v, u, np), oracle::pair_loss(v, u, nm));
      }
    }
  }
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 4 + rng.below(17);
    DenseMatrix X(n, 5), Y(n, 2);
    for (auto& x : X.data) x = rng.normal();
    for (auto& y : Y.data) y = rng.normal();
    const auto P = conditional_affinities(X, std::min(3.0, double(n) - 1.0)).P;
    const auto g = kl_gradient(P, Y);
    const double h = 1e-5;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 2; ++c) {
        const double keep = Y(i, c);
        Y(i, c) = keep + h;
        const double up = oracle::tsne_kl(P, Y);
        Y(i, c) = keep - h;
        const double down = oracle::tsne_kl(P, Y);
        Y(i, c) = keep;
        const double fd = (up - down) / (2 * h);
        worst_kl = std::max(worst_kl, std::abs(g(i, c) - fd) / std::max(std::abs(fd), 1e-4));
      }
    }
  }
  return {worst_pv < 1e-4 && worst_kl < 1e-5, std::to_string(instances) + " instances each; PV-DBOW worst relative " +
                                                   fmt("%.2e", worst_pv) + " (< 1e-4), t-SNE KL worst relative " +
                                                   fmt("%.2e", worst_kl) + " (< 1e-5)"};
}

Outcome perplexity_calibration() {
  Rng rng(99);
  double worst = 0.0;
  for (int set = 0; set < 100; ++set) {
    const std::size_t n = 20 + rng.below(80);
    DenseMatrix X(n, 1 + rng.below(20));
    const double spread = 0.1 + 10.0 * rng.uniform();
    for (auto& x : X.data) x = spread * rng.normal();
    const double perp = 2.0 + rng.uniform() * (std::min(50.0, double(n) / 3.0) - 2.0);
    const auto A = conditional_affinities(X, perp);
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(oracle::conditional_entropy_bits(X, i, A.sigmas[i]) - std::log2(perp)));
    }
  }
  std::vector<std::string> labels;
  const auto blobs = testing_support::two_blobs(50, 300, 1.0, 5, &labels);
  TsneOptions opt;
  opt.perplexity = 20;
  const auto proj = tsne(blobs, opt);
  const double sil = oracle::silhouette(proj.coordinates, labels);
  return {worst <= 1e-5 && sil > 0.5, "100 point sets, worst entropy error " + fmt("%.2e", worst) +
                                           " bits; two-blob silhouette " + fmt("%.3f", sil)};
}

Outcome poverty_mapping() {
  const std::vector<std::pair<double, std::string>> cases{{10, "Low Poverty"},      {30, "Moderate Poverty"},
                                                          {60, "High Poverty"},     {90, "Highest Poverty"},
                                                          {25, "Moderate Poverty"}, {50, "High Poverty"},
                                                          {75, "Highest Poverty"}};
  Outcome out;
  std::ostringstream why;
  for (const auto& [rate, expected] : cases) {
    const auto& got = map_rate_to_level(rate);
    if (got != expected) out.pass = false;
    why << rate << "->" << got << ' ';
  }
  why << "(bins lower-inclusive)";
  out.detail = why.str();
  return out;
}

Outcome svm_sanity() {
  std::vector<std::string> y;
  const auto dense = testing_support::two_blobs(50, 2, 3.0, 12, &y);
  SparseMatrix X(2);
  for (std::size_t r = 0; r < dense.rows; ++r) X.append_row({{0, dense(r, 0)}, {1, dense(r, 1)}});
  SvmOptions opt;
  opt.seed = 3;
  const auto model = train_svm(X, y, opt);
  const auto pred = predict(model, X);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += pred[i] == y[i];

  std::size_t violations = 0, epochs = 0;
  for (const std::string positive : {"a", "b"}) {
    std::vector<int> sign;
    for (const auto& l : y) sign.push_back(l == positive ? 1 : -1);
    for (double C : {0.01, 1.0, 5.0, 100.0}) {
      opt.C = C;
      const auto svm = train_binary_svm(X, sign, opt);
      epochs += svm.dual_trace.size();
      for (std::size_t e = 1; e < svm.dual_trace.size(); ++e) {
        violations += svm.dual_trace[e] > svm.dual_trace[e - 1] + 1e-12 * std::abs(svm.dual_trace[e - 1]);
      }
    }
  }
  opt.C = 5.0;
  const bool same = train_svm(X, y, opt) == train_svm(X, y, opt);
  return {correct == y.size() && violations == 0 && same,
          "training accuracy " + std::to_string(correct) + "/" + std::to_string(y.size()) + ", dual increases " +
              std::to_string(violations) + " over " + std::to_string(epochs) + " epochs, identical weights " +
              (same ? "yes" : "no")};
}

Outcome determinism() {
  const auto cfg = preset_config("subjective", 7);
  const auto a = testing_support::scratch_dir("determinism_a");
  const auto b = testing_support::scratch_dir("determinism_b");
  emit(run_audit(cfg), a);
  emit(run_audit(cfg), b);
  const auto ra = testing_support::read_text(a / "report.json");
  const auto rb = testing_support::read_text(b / "report.json");
  const bool same = !ra.empty() && ra == rb;
  return {same, std::string("report.json ") + (same ? "byte-identical" : "differs") + " across two runs (" +
                    std::to_string(ra.size()) + " bytes, sha256 " + sha256_file(a / "report.json").substr(0, 16) +
                    ")"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"f1_table_reproduction", f1_table_reproduction},
      {"chi2_oracle", chi2_oracle},
      {"nfis_properties", nfis_properties},
      {"synthetic_detection_power", synthetic_detection_power},
      {"truth_matrix_fidelity", truth_matrix_fidelity},
      {"gradient_checks", gradient_checks},
      {"perplexity_calibration", perplexity_calibration},
      {"poverty_mapping", poverty_mapping},
      {"svm_sanity", svm_sanity},
      {"determinism", determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: subjaudit_acceptance <criterion>|all\n";
    return 2;
  }
  const std::string wanted = argv[1];
  bool found = false, all_pass = true;
  for (const auto& [name, run] : criteria()) {
    if (wanted != "all" && wanted != name) continue;
    found = true;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    all_pass = all_pass && o.pass;
  }
  if (!found) {
    std::cerr << "unknown criterion '" << wanted << "'\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
