// Copyright 2026 The TinyForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <cmath>
#include <cstdlib>
#include <limits>

#include <fmt/format.h>

#include "tinyforge/error.hpp"
#include "tinyforge/llm.hpp"

namespace tinyforge {

Usd Usd::from_dollars(double dollars) {
  return Usd{static_cast<std::int64_t>(std::llround(dollars * static_cast<double>(kPerDollar)))};
}

std::string Usd::to_string() const {
  constexpr std::int64_t kPicoPerMicro = 1'000'000;
  const bool negative = pico < 0;
  const unsigned __int128 magnitude = negative ? static_cast<unsigned __int128>(-static_cast<__int128>(pico))
                                               : static_cast<unsigned __int128>(pico);
  const auto micros = static_cast<std::uint64_t>((magnitude + kPicoPerMicro / 2) / kPicoPerMicro);
  return fmt::format("{}{}.{:06}", negative && micros != 0 ? "-" : "", micros / 1'000'000, micros % 1'000'000);
}

CostModel CostModel::per_token(double input_usd, double output_usd) {
  if (!(input_usd >= 0.0) || !(output_usd >= 0.0)) {
    throw Error(ErrorKind::InvalidPolicy, "token prices must be non-negative");
  }
  return CostModel{Usd::from_dollars(input_usd), Usd::from_dollars(output_usd)};
}

Usd price(const TokenUsage& usage, const CostModel& model) {
  if (usage.prompt_tokens < 0 || usage.completion_tokens < 0) {
    throw Error(ErrorKind::NegativeTokens, "(" + std::to_string(usage.prompt_tokens) + ", " +
                                               std::to_string(usage.completion_tokens) + ")");
  }
  const __int128 total = static_cast<__int128>(usage.prompt_tokens) * model.input_price_per_token.pico +
                         static_cast<__int128>(usage.completion_tokens) * model.output_price_per_token.pico;
  if (total > std::numeric_limits<std::int64_t>::max() || total < std::numeric_limits<std::int64_t>::min()) {
    throw Error(ErrorKind::InvalidPolicy, "cost overflows the fixed-point range");
  }
  return Usd{static_cast<std::int64_t>(total)};
}

}  // namespace tinyforge
