#pragma once

// Loss-curve CSV (step,train_loss,val_loss,lr,wall_time_s) and a
// dependency-free SVG plot of it.

#include <string>
#include <string_view>
#include <vector>

#include "minigpt/trainer.hpp"

namespace minigpt {

inline constexpr std::string_view kLossLogHeader = "step,train_loss,val_loss,lr,wall_time_s";

std::string format_loss_log(const std::vector<LossRecord>& log);
/// Throws IoError naming the offending line.
std::vector<LossRecord> parse_loss_log(std::string_view csv);

void write_loss_log(const std::string& path, const std::vector<LossRecord>& log);
std::vector<LossRecord> read_loss_log(const std::string& path);

/// Two polylines (train, val) over step, labelled axes with ticks, a legend
/// and a marker on the lowest validation loss. Throws std::invalid_argument
/// for an empty log.
std::string render_loss_svg(const std::vector<LossRecord>& log, const std::string& title = "loss");

}  // namespace minigpt
