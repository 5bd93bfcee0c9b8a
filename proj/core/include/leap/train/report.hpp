#pragma once

#include <string>

#include "leap/train/config.hpp"
#include "leap/train/trainer.hpp"
#include "leap/verify/verifier.hpp"

namespace leap::train {

// Line-delimited records; every record embeds the fully-resolved config and
// seed. Pure string builders so byte-level determinism is testable directly.
std::string metrics_jsonl(const RunConfig& config, const std::string& run_name,
                          const RunMetrics& metrics);
std::string sweep_jsonl(const RunConfig& config, const SweepResult& sweep);
std::string curve_tsv(const RunMetrics& metrics);  // epoch, train metric, val metric
std::string summary_table(const std::string& run_name, const RunMetrics& metrics);
std::string verify_jsonl(const verify::TrialSummary& sufficiency,
                         const verify::TrialSummary& necessity, std::uint64_t seed);

// Writes metrics.jsonl, curve.tsv, summary.txt and checkpoint.leap under
// out_dir (created if needed).
void write_run_files(const std::string& out_dir, const RunConfig& config,
                     const std::string& run_name, const TrainResult& result);

}  // namespace leap::train
