#include "mwem/sensitive.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <thread>

namespace mwem {

namespace {
constexpr std::size_t kRowBlock = 1 << 16;
}

SensitiveSource::SensitiveSource(const Histogram* hist) : hist_(hist) {
  if (hist_ == nullptr) throw DomainError("sensitive source requires a histogram");
}

SensitiveSource::SensitiveSource(const RecordTable* records) : records_(records) {
  if (records_ == nullptr) throw DomainError("sensitive source requires a record table");
}

double SensitiveSource::mass() const {
  return hist_ ? hist_->mass() : static_cast<double>(records_->row_count());
}

double SensitiveSource::exact_answer(const LinearQuery& query) const {
  if (hist_) return evaluate(query, *hist_);

  const RecordTable& table = *records_;
  const std::size_t rows = table.row_count();
  auto block_sum = [&](std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t r = begin; r < end; ++r) sum += query.value_on_record(table, r);
    return sum;
  };
  if (rows <= kRowBlock) return block_sum(0, rows);

  // Fixed blocks combined in block order: the reduction is deterministic
  // regardless of scheduling.
  const std::size_t blocks = (rows + kRowBlock - 1) / kRowBlock;
  const std::size_t workers =
      std::min<std::size_t>(blocks, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<double> partial(blocks, 0.0);
  std::vector<std::future<void>> tasks;
  tasks.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t b = w; b < blocks; b += workers) {
        partial[b] = block_sum(b * kRowBlock, std::min(rows, (b + 1) * kRowBlock));
      }
    }));
  }
  for (auto& t : tasks) t.get();
  double sum = 0.0;
  for (double p : partial) sum += p;
  return sum;
}

SensitiveGate::SensitiveGate(SensitiveSource source, const Workload* workload,
                             BudgetLedger* ledger, bool diagnostics_allowed)
    : source_(source),
      workload_(workload),
      ledger_(ledger),
      diagnostics_allowed_(diagnostics_allowed) {
  if (workload_ == nullptr || ledger_ == nullptr) {
    throw DomainError("sensitive gate requires a workload and a ledger");
  }
  cache_.assign(workload_->size(), 0.0);
  cached_.assign(workload_->size(), 0);
}

double SensitiveGate::cached_answer(std::size_t query_index) {
  if (query_index >= workload_->size()) {
    throw DomainError("query index out of range");
  }
  if (!cached_[query_index]) {
    const auto start = std::chrono::steady_clock::now();
    cache_[query_index] = source_.exact_answer((*workload_)[query_index]);
    source_eval_seconds_ += std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start).count();
    cached_[query_index] = 1;
  }
  return cache_[query_index];
}

std::span<const double> SensitiveGate::charged_workload_answers(std::string_view label,
                                                                double epsilon) {
  ledger_->charge(std::string(label), epsilon);
  ++charged_touches_;
  for (std::size_t i = 0; i < workload_->size(); ++i) cached_answer(i);
  return cache_;
}

double SensitiveGate::charged_answer(std::size_t query_index, std::string_view label,
                                     double epsilon) {
  ledger_->charge(std::string(label), epsilon);
  ++charged_touches_;
  return cached_answer(query_index);
}

std::vector<double> SensitiveGate::charged_answers(std::span<const std::size_t> query_indices,
                                                   std::string_view label, double epsilon) {
  ledger_->charge(std::string(label), epsilon);
  ++charged_touches_;
  std::vector<double> answers;
  answers.reserve(query_indices.size());
  for (std::size_t i : query_indices) answers.push_back(cached_answer(i));
  return answers;
}

std::vector<double> SensitiveGate::charged_count_snapshot(std::string_view label, double epsilon) {
  if (source_.histogram() == nullptr) {
    throw ConfigError("count snapshot requires an explicit-histogram source");
  }
  ledger_->charge(std::string(label), epsilon);
  ++charged_touches_;
  const auto w = source_.histogram()->weights();
  return std::vector<double>(w.begin(), w.end());
}

double SensitiveGate::charged_mass(std::string_view label, double epsilon) {
  ledger_->charge(std::string(label), epsilon);
  ++charged_touches_;
  return source_.mass();
}

double SensitiveGate::diagnostic_answer(std::size_t query_index) {
  if (!diagnostics_allowed_) {
    throw ConfigError("diagnostic access requires the diagnostics flag (non-private run)");
  }
  diagnostics_used_ = true;
  return cached_answer(query_index);
}

const SensitiveSource& SensitiveGate::diagnostic_source() {
  if (!diagnostics_allowed_) {
    throw ConfigError("diagnostic access requires the diagnostics flag (non-private run)");
  }
  diagnostics_used_ = true;
  return source_;
}

}  // namespace mwem
