#pragma once

#include <string>

#include "amber/amber.hpp"
#include "amber/baselines.hpp"

namespace amber {

// Versioned JSON documents for elimination traces and feature rankings.
// Per-iteration fields: iteration, eliminated, relevance, redundancy,
// saliency, seconds (plus the candidate ids the score vectors refer to).

std::string trace_to_json(const EliminationTrace& trace);
EliminationTrace trace_from_json(const std::string& text);

std::string ranking_to_json(const FeatureRanking& ranking);
FeatureRanking ranking_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace amber
