#ifndef CELLPOP_HISTORY_HPP
#define CELLPOP_HISTORY_HPP

#include "cellpop/model.hpp"

#include <deque>
#include <vector>

namespace cellpop {

/// Linear undo/redo over whole ViewConfig snapshots.
class HistoryStack {
  public:
    static constexpr std::size_t kMaxPast = 100;

    explicit HistoryStack(ViewConfig initial = {}) : present_(std::move(initial)) {}

    const ViewConfig& present() const noexcept { return present_; }
    const std::deque<ViewConfig>& past() const noexcept { return past_; }     ///< oldest first
    const std::vector<ViewConfig>& future() const noexcept { return future_; } ///< next redo last

    bool can_undo() const noexcept { return !past_.empty(); }
    bool can_redo() const noexcept { return !future_.empty(); }

    /// Returns false (and changes nothing) when `config` equals the present.
    bool push(ViewConfig config);
    bool undo();
    bool redo();

    bool operator==(const HistoryStack&) const = default;

  private:
    std::deque<ViewConfig> past_;
    ViewConfig present_;
    std::vector<ViewConfig> future_;
};

} // namespace cellpop

#endif
