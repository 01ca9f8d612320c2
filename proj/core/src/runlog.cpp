#include "glunet/runlog.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "glunet/tensor.hpp"

namespace glunet {

void RunLog::append(StepRecord r) {
  if (!records.empty()) {
    const auto& last = records.back();
    if (r.step < last.step || r.seconds < last.seconds || r.tokens < last.tokens) {
      throw ContractError("run log: step, tokens and seconds must be monotone");
    }
  }
  records.push_back(std::move(r));
}

std::string RunLog::to_csv() const {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  os.precision(10);
  for (const auto& r : records) {
    os << r.step << ',' << r.epoch << ',' << r.tokens << ',' << r.seconds << ',' << r.train_nll << ','
       << r.grad_norm << ',';
    if (r.val_ppl) os << *r.val_ppl;
    os << '\n';
  }
  return os.str();
}

void RunLog::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("run log: cannot write " + path);
  out << to_csv();
}

}  // namespace glunet
