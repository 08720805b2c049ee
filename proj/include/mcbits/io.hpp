#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "mcbits/models.hpp"

namespace mcbits {

using Bytes = std::vector<std::uint8_t>;
using AnyModel = std::variant<MixtureModel, Hmm>;

enum class ModelKind : std::uint32_t { mixture = 1, hmm = 2 };

// Little-endian u32 fields [kind, r, K_x, K_z, T] followed by every PMF as
// [len][counts...]: mixture = prior then likelihood rows; HMM = initial, then
// transition rows, then emission rows.
Bytes serialize_model(const MixtureModel& model);
Bytes serialize_model(const Hmm& model);
AnyModel deserialize_model(std::span<const std::uint8_t> bytes);

// [count] then per item [len][symbols...], all little-endian u32.
Bytes serialize_dataset(const Dataset& data);
Dataset deserialize_dataset(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace mcbits
