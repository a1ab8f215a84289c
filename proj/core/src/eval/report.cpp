#include "mixstyle/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mixstyle::evalm {

double embedding_distance(const enc::Embedding& a, const enc::Embedding& b) {
  require(a.v.size() == b.v.size() && !a.v.empty(), "embedding_distance: dimension mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) acc += std::fabs(static_cast<double>(a.v[i]) - b.v[i]);
  return 1e3 * acc / static_cast<double>(a.v.size());
}

std::vector<TransferReportRow> style_transfer_report(const std::vector<TransferQuad>& quads,
                                                     enc::EncoderNet<float>& encoder,
                                                     const cloner::SpectralLossConfig& loss_cfg) {
  require(!quads.empty(), "style_transfer_report: no quadruples");

  auto accumulate = [&](bool identity) {
    TransferReportRow row;
    row.method = identity ? "input" : "system";
    for (const auto& q : quads) {
      const audio::AudioBuffer& y = identity ? q.input : q.y;
      row.loss_lr += cloner::mss_loss(q.gt.left(), y.left(), loss_cfg) +
                     cloner::mss_loss(q.gt.right(), y.right(), loss_cfg);
      std::vector<float> gm, gs, ym, ys;
      audio::to_mid_side(q.gt, gm, gs);
      audio::to_mid_side(y, ym, ys);
      row.loss_ms += cloner::mss_loss(gm, ym, loss_cfg) + cloner::mss_loss(gs, ys, loss_cfg);
      const auto ey = enc::encode(y, encoder);
      row.dist_y_ref += embedding_distance(ey, enc::encode(q.ref, encoder));
      row.dist_y_gt += embedding_distance(ey, enc::encode(q.gt, encoder));
    }
    const double inv = 1.0 / static_cast<double>(quads.size());
    row.loss_lr *= inv;
    row.loss_ms *= inv;
    row.dist_y_ref *= inv;
    row.dist_y_gt *= inv;
    return row;
  };

  return {accumulate(true), accumulate(false)};
}

std::string transfer_report_csv(const std::vector<TransferReportRow>& rows) {
  std::ostringstream os;
  os << "method,mss_left_right,mss_mid_side,dist_y_ref,dist_y_gt\n";
  for (const auto& r : rows)
    os << r.method << "," << r.loss_lr << "," << r.loss_ms << "," << r.dist_y_ref << ","
       << r.dist_y_gt << "\n";
  return os.str();
}

std::string transfer_report_table(const std::vector<TransferReportRow>& rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %14s %14s %12s %12s\n", "method", "MSS l&r", "MSS m&s",
                "d(y,ref)", "d(y,gt)");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-10s %14.4f %14.4f %12.4f %12.4f\n", r.method.c_str(),
                  r.loss_lr, r.loss_ms, r.dist_y_ref, r.dist_y_gt);
    os << line;
  }
  return os.str();
}

std::string metric_report_csv(const std::vector<MetricCase>& cases) {
  std::ostringstream os;
  os << "case,dcimig,dci_rf_expl_mean,dci_rf_expl_std\n";
  for (const auto& c : cases)
    os << c.name << "," << c.dcimig << "," << c.rf_mean << "," << c.rf_std << "\n";
  return os.str();
}

std::string metric_report_table(const std::vector<MetricCase>& cases) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-26s %8s %18s\n", "case", "DCIMIG", "DCI RF Expl");
  os << line;
  for (const auto& c : cases) {
    std::snprintf(line, sizeof(line), "%-26s %8.3f %10.3f +- %.3f\n", c.name.c_str(), c.dcimig,
                  c.rf_mean, c.rf_std);
    os << line;
  }
  return os.str();
}

void export_embeddings(const CodeMatrix& codes, const FactorMatrix& factors,
                       const std::string& path) {
  codes.validate();
  factors.validate();
  require(codes.n == factors.n, "export_embeddings: sample count mismatch");

  std::ofstream f(path, std::ios::trunc);
  require(f.good(), "export_embeddings: cannot write " + path);
  f << "id";
  for (int k = 0; k < factors.k; ++k) f << ",factor_" << k;
  for (int d = 0; d < codes.d; ++d) f << ",c" << d;
  f << "\n";
  char buf[48];
  for (int i = 0; i < codes.n; ++i) {
    f << i;
    for (int k = 0; k < factors.k; ++k) f << "," << factors.at(i, k);
    for (int d = 0; d < codes.d; ++d) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(codes.at(i, d)));
      f << "," << buf;
    }
    f << "\n";
  }
}

}  // namespace mixstyle::evalm
