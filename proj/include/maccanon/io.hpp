#pragma once

#include <string>

#include "maccanon/model.hpp"
#include "maccanon/solvers.hpp"

namespace maccanon {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// JSON channel file: complex scalars as [re, im] pairs, floats with 17
/// significant digits.
void save_channel(const std::string& path, const ChannelSet& ch);
ChannelSet load_channel(const std::string& path);

/// Report file mirrors the channel layout plus flag/theta/w/alpha/orders/trace.
void save_report(const std::string& path, const ChannelSet& ch, const SolveReport& rep);
SolveReport load_report(const std::string& path);

std::string channel_to_json(const ChannelSet& ch);
std::string report_to_json(const ChannelSet& ch, const SolveReport& rep);
ChannelSet channel_from_json(const std::string& text);
SolveReport report_from_json(const std::string& text);

}  // namespace maccanon
