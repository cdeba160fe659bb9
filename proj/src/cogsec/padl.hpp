#pragma once

// Terminal identity built from physical- and radio-layer attributes.

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace cogsec {

using AttributeValue = std::variant<std::string, double>;

struct PadlAttribute {
  std::string name;
  AttributeValue value;
  bool operator==(const PadlAttribute&) const = default;
};

// Well-known attribute names used by the simulator. The schema is open:
// any named attribute participates in the digest.
namespace padl_attr {
inline constexpr const char* kHardwareAddress = "hw_addr";
inline constexpr const char* kChipset = "chipset";
inline constexpr const char* kBands = "bands";
inline constexpr const char* kCarrierOffsetPpm = "rf_cfo_ppm";
inline constexpr const char* kIqGainImbalance = "rf_iq_gain";
inline constexpr const char* kIqPhaseImbalance = "rf_iq_phase";
inline constexpr const char* kTxPowerOffsetDb = "rf_tx_offset_db";
}  // namespace padl_attr

class PadlFingerprint {
 public:
  PadlFingerprint() = default;
  // Attributes are stored sorted by name. Throws Validation when the list is
  // empty, a name repeats, or a real value is non-finite.
  explicit PadlFingerprint(std::vector<PadlAttribute> attributes);

  const std::vector<PadlAttribute>& attributes() const { return attributes_; }
  // Lower-case hex SHA-256 over the canonical attribute encoding.
  const std::string& digest() const { return digest_; }
  const AttributeValue* find(const std::string& name) const;
  bool empty() const { return attributes_.empty(); }

  bool operator==(const PadlFingerprint& other) const { return digest_ == other.digest_; }

  // name=s:<text> or name=r:<%.17g>, one per line, in name order.
  static std::string canonical_encoding(const std::vector<PadlAttribute>& sorted);

 private:
  std::vector<PadlAttribute> attributes_;
  std::string digest_;
};

nlohmann::json to_json(const PadlFingerprint& padl);
// Accepts {"attributes":[{"name":..,"value":..}], "digest"?: ..}; a present
// digest must match the recomputed one.
PadlFingerprint padl_from_json(const nlohmann::json& doc);

std::string sha256_hex(const std::string& data);

}  // namespace cogsec
