#pragma once

// Closed-form memory footprints of token-level distillation against verbal
// scoring. All quantities are exact byte counts; units are applied only when
// formatting.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ovd {

inline constexpr std::uint64_t kBytesPerGB = 1'000'000'000ULL;
inline constexpr std::uint64_t kBytesPerGiB = 1ULL << 30;
inline constexpr std::uint64_t kBytesPerMiB = 1ULL << 20;

struct ByteQuantity {
  std::uint64_t bytes = 0;

  double gb() const { return static_cast<double>(bytes) / static_cast<double>(kBytesPerGB); }
  double gib() const { return static_cast<double>(bytes) / static_cast<double>(kBytesPerGiB); }

  friend bool operator==(const ByteQuantity&, const ByteQuantity&) = default;
};

enum class MemoryUnit { gb, gib, bytes };

std::string_view to_string(MemoryUnit unit);
MemoryUnit parse_memory_unit(std::string_view text);

// Number with its unit, e.g. "4.98 GB", "4.64 GiB", "4980736000 B".
std::string format_bytes(ByteQuantity q, MemoryUnit unit, int decimals = 2);

struct MemorySpec {
  std::uint64_t B = 1;
  std::uint64_t N = 1;
  std::uint64_t L = 8192;
  std::uint64_t V = 152'000;
  std::uint64_t v = 10;
  std::uint64_t K = 20;
  std::uint64_t n_layers = 28;
  std::uint64_t H_kv = 4;
  std::uint64_t d = 128;
  std::uint64_t d32 = 4;
  std::uint64_t d16 = 2;

  void validate() const;
};

// Products throw ContractViolation on a zero input and NumericError on
// 64-bit overflow.
ByteQuantity logits_bytes(std::uint64_t L, std::uint64_t V, std::uint64_t width);
ByteQuantity kv_cache_bytes(std::uint64_t n_layers, std::uint64_t H_kv, std::uint64_t L,
                            std::uint64_t d, std::uint64_t width);

struct TokenDistillBreakdown {
  ByteQuantity fp32;   // B * N * L * V * d32
  ByteQuantity bf16;   // B * N * L * V * d16
  ByteQuantity total;  // fp32 + bf16
};

TokenDistillBreakdown token_distill_bytes(const MemorySpec& spec);
ByteQuantity token_distill_total_bytes(const MemorySpec& spec);

struct VerbalFootprint {
  ByteQuantity bytes;  // N * K * v * d32
  double reduction = 0.0;  // N * V / v
};

// Throws ContractViolation when K > L.
VerbalFootprint verbal_bytes_and_reduction(const MemorySpec& spec);

struct Table1Row {
  std::string component;
  std::string shape;
  ByteQuantity bytes;
};

// Logits FP32, logits BF16, one KV-cache layer, all KV-cache layers.
std::vector<Table1Row> table1(const MemorySpec& spec);

enum class SweepAxis { L, N };

SweepAxis parse_sweep_axis(std::string_view text);

struct CurveRow {
  std::uint64_t axis_value = 0;
  ByteQuantity fp32;
  ByteQuantity bf16;
  ByteQuantity kv;
  ByteQuantity total;  // fp32 + bf16
};

// Each row evaluates `spec` with the swept count replaced by the axis value.
// The KV cache is per sequence and scales with N for the N axis.
std::vector<CurveRow> emit_curves(SweepAxis axis, std::span<const std::uint64_t> values,
                                  const MemorySpec& spec);

// "a:b" doubles from a while <= b; "a:b:s" steps linearly by s.
std::vector<std::uint64_t> parse_sweep_range(std::string_view text);

}  // namespace ovd
