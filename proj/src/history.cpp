#include "cellpop/history.hpp"

namespace cellpop {

bool HistoryStack::push(ViewConfig config) {
    if (config == present_) return false;
    past_.push_back(std::move(present_));
    if (past_.size() > kMaxPast) past_.pop_front();
    present_ = std::move(config);
    future_.clear();
    return true;
}

bool HistoryStack::undo() {
    if (past_.empty()) return false;
    future_.push_back(std::move(present_));
    present_ = std::move(past_.back());
    past_.pop_back();
    return true;
}

bool HistoryStack::redo() {
    if (future_.empty()) return false;
    past_.push_back(std::move(present_));
    present_ = std::move(future_.back());
    future_.pop_back();
    return true;
}

} // namespace cellpop
