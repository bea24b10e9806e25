#include "ovd/memlab.hpp"

#include <charconv>
#include <initializer_list>

#include <fmt/format.h>

#include "ovd/error.hpp"

namespace ovd {

std::string_view to_string(MemoryUnit unit) {
  switch (unit) {
    case MemoryUnit::gb: return "GB";
    case MemoryUnit::gib: return "GiB";
    case MemoryUnit::bytes: return "B";
  }
  return "?";
}

MemoryUnit parse_memory_unit(std::string_view text) {
  if (text == "gb") return MemoryUnit::gb;
  if (text == "gib") return MemoryUnit::gib;
  if (text == "bytes") return MemoryUnit::bytes;
  throw ConfigError(fmt::format("unknown unit '{}' (expected gb, gib or bytes)", text));
}

std::string format_bytes(ByteQuantity q, MemoryUnit unit, int decimals) {
  switch (unit) {
    case MemoryUnit::gb: return fmt::format("{:.{}f} GB", q.gb(), decimals);
    case MemoryUnit::gib: return fmt::format("{:.{}f} GiB", q.gib(), decimals);
    case MemoryUnit::bytes: return fmt::format("{} B", q.bytes);
  }
  return {};
}

void MemorySpec::validate() const {
  for (auto x : {B, N, L, V, v, K, n_layers, H_kv, d, d32, d16}) {
    if (x == 0) throw ConfigError("memory spec counts must be positive");
  }
  if (d32 != 2 * d16) throw ConfigError("memory spec requires d32 = 2 * d16");
}

namespace {

std::uint64_t checked_product(std::initializer_list<std::uint64_t> factors) {
  std::uint64_t p = 1;
  for (auto f : factors) {
    if (f == 0) throw ContractViolation("memory formula inputs must be positive");
    if (__builtin_mul_overflow(p, f, &p)) throw NumericError("byte count overflows 64 bits");
  }
  return p;
}

std::uint64_t checked_sum(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = 0;
  if (__builtin_add_overflow(a, b, &s)) throw NumericError("byte count overflows 64 bits");
  return s;
}

}  // namespace

ByteQuantity logits_bytes(std::uint64_t L, std::uint64_t V, std::uint64_t width) {
  return {checked_product({width, L, V})};
}

ByteQuantity kv_cache_bytes(std::uint64_t n_layers, std::uint64_t H_kv, std::uint64_t L,
                            std::uint64_t d, std::uint64_t width) {
  return {checked_product({n_layers, 2, H_kv, L, d, width})};
}

TokenDistillBreakdown token_distill_bytes(const MemorySpec& spec) {
  TokenDistillBreakdown r;
  r.fp32 = {checked_product({spec.B, spec.N, spec.L, spec.V, spec.d32})};
  r.bf16 = {checked_product({spec.B, spec.N, spec.L, spec.V, spec.d16})};
  r.total = {checked_sum(r.fp32.bytes, r.bf16.bytes)};
  return r;
}

ByteQuantity token_distill_total_bytes(const MemorySpec& spec) {
  return token_distill_bytes(spec).total;
}

VerbalFootprint verbal_bytes_and_reduction(const MemorySpec& spec) {
  if (spec.K > spec.L) {
    throw ContractViolation(
        fmt::format("step count K={} exceeds sequence length L={}", spec.K, spec.L));
  }
  VerbalFootprint r;
  r.bytes = {checked_product({spec.N, spec.K, spec.v, spec.d32})};
  r.reduction = static_cast<double>(spec.N) * static_cast<double>(spec.V) /
                static_cast<double>(spec.v);
  return r;
}

std::vector<Table1Row> table1(const MemorySpec& spec) {
  return {
      {"Logits (FP32)", "[L, V]", logits_bytes(spec.L, spec.V, spec.d32)},
      {"Logits (BF16)", "[L, V]", logits_bytes(spec.L, spec.V, spec.d16)},
      {"KV Cache (1 layer)", "[2, H_kv, L, d]", kv_cache_bytes(1, spec.H_kv, spec.L, spec.d, spec.d16)},
      {fmt::format("KV Cache ({} layers)", spec.n_layers), "[N_L, 2, H_kv, L, d]",
       kv_cache_bytes(spec.n_layers, spec.H_kv, spec.L, spec.d, spec.d16)},
  };
}

SweepAxis parse_sweep_axis(std::string_view text) {
  if (text == "L") return SweepAxis::L;
  if (text == "N") return SweepAxis::N;
  throw ConfigError(fmt::format("unknown sweep axis '{}' (expected L or N)", text));
}

std::vector<CurveRow> emit_curves(SweepAxis axis, std::span<const std::uint64_t> values,
                                  const MemorySpec& spec) {
  if (values.empty()) throw ContractViolation("sweep has no values");
  std::vector<CurveRow> rows;
  for (auto x : values) {
    MemorySpec s = spec;
    (axis == SweepAxis::L ? s.L : s.N) = x;
    const auto logits = token_distill_bytes(s);
    CurveRow row;
    row.axis_value = x;
    row.fp32 = logits.fp32;
    row.bf16 = logits.bf16;
    row.total = logits.total;
    row.kv = {checked_product(
        {s.B, s.N, kv_cache_bytes(s.n_layers, s.H_kv, s.L, s.d, s.d16).bytes})};
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::uint64_t parse_count(std::string_view text, std::string_view whole) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
    throw ConfigError(fmt::format("invalid sweep range '{}' (expected a:b or a:b:step)", whole));
  }
  return value;
}

}  // namespace

std::vector<std::uint64_t> parse_sweep_range(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 2 && parts.size() != 3) {
    throw ConfigError(fmt::format("invalid sweep range '{}' (expected a:b or a:b:step)", text));
  }
  const auto lo = parse_count(parts[0], text);
  const auto hi = parse_count(parts[1], text);
  if (lo > hi) throw ConfigError(fmt::format("sweep range '{}' is empty", text));
  std::vector<std::uint64_t> values;
  if (parts.size() == 2) {
    for (auto x = lo; x <= hi; x *= 2) values.push_back(x);
  } else {
    const auto stepv = parse_count(parts[2], text);
    for (auto x = lo; x <= hi; x += stepv) values.push_back(x);
  }
  return values;
}

}  // namespace ovd
