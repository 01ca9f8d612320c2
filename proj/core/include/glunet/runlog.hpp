#pragma once

#include <optional>
#include <string>
#include <vector>

namespace glunet {

/// Per-step training record; val_ppl is present only on evaluation steps.
struct StepRecord {
  long step = 0;
  int epoch = 0;
  long tokens = 0;
  double seconds = 0;
  double train_nll = 0;
  double grad_norm = 0;
  std::optional<double> val_ppl;
};

/// Append-only learning-curve log with monotone step/clock fields.
struct RunLog {
  std::vector<StepRecord> records;

  void append(StepRecord r);
  std::string to_csv() const;  // header: step,epoch,tokens,seconds,train_nll,grad_norm,val_ppl
  void save_csv(const std::string& path) const;

  static constexpr const char* kCsvHeader = "step,epoch,tokens,seconds,train_nll,grad_norm,val_ppl";
};

}  // namespace glunet
