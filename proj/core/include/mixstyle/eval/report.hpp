#pragma once

#include <string>
#include <vector>

#include "mixstyle/cloner/spectral_loss.hpp"
#include "mixstyle/encoder/encoder.hpp"
#include "mixstyle/eval/disentanglement.hpp"

namespace mixstyle::evalm {

// lambda * mean absolute difference of the full embedding vectors,
// lambda = 1e3. Mean (not sum) keeps the score dimension-independent.
double embedding_distance(const enc::Embedding& a, const enc::Embedding& b);

struct TransferQuad {
  audio::AudioBuffer input, ref, gt, y;
};

struct TransferReportRow {
  std::string method;
  double loss_lr = 0.0;      // mss over left + right
  double loss_ms = 0.0;      // mss over mid + side
  double dist_y_ref = 0.0;   // lambda * dPhi(y, ref)
  double dist_y_gt = 0.0;
};

// Two rows: the untouched-input baseline and the system outputs.
std::vector<TransferReportRow> style_transfer_report(const std::vector<TransferQuad>& quads,
                                                     enc::EncoderNet<float>& encoder,
                                                     const cloner::SpectralLossConfig& loss_cfg);

std::string transfer_report_csv(const std::vector<TransferReportRow>& rows);
std::string transfer_report_table(const std::vector<TransferReportRow>& rows);

struct MetricCase {
  std::string name;
  double dcimig = 0.0;
  double rf_mean = 0.0;
  double rf_std = 0.0;
};

std::string metric_report_csv(const std::vector<MetricCase>& cases);
std::string metric_report_table(const std::vector<MetricCase>& cases);

// One row per sample: id, factor labels, code values. float32 print
// precision round-trips.
void export_embeddings(const CodeMatrix& codes, const FactorMatrix& factors,
                       const std::string& path);

}  // namespace mixstyle::evalm
