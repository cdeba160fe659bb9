#include "cogsec/padl.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "cogsec/error.hpp"

namespace cogsec {

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::Validation, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

PadlFingerprint::PadlFingerprint(std::vector<PadlAttribute> attributes) : attributes_(std::move(attributes)) {
  if (attributes_.empty()) fail(ErrorCode::Validation, "PADL fingerprint needs at least one attribute");
  std::sort(attributes_.begin(), attributes_.end(),
            [](const PadlAttribute& a, const PadlAttribute& b) { return a.name < b.name; });
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    const auto& attr = attributes_[i];
    if (attr.name.empty()) fail(ErrorCode::Validation, "PADL attribute with empty name");
    if (i > 0 && attributes_[i - 1].name == attr.name) {
      fail(ErrorCode::Validation, "PADL attribute '" + attr.name + "' repeats");
    }
    if (const double* r = std::get_if<double>(&attr.value); r && !std::isfinite(*r)) {
      fail(ErrorCode::Validation, "PADL attribute '" + attr.name + "' is non-finite");
    }
  }
  digest_ = sha256_hex(canonical_encoding(attributes_));
}

const AttributeValue* PadlFingerprint::find(const std::string& name) const {
  auto it = std::lower_bound(attributes_.begin(), attributes_.end(), name,
                             [](const PadlAttribute& a, const std::string& n) { return a.name < n; });
  if (it == attributes_.end() || it->name != name) return nullptr;
  return &it->value;
}

std::string PadlFingerprint::canonical_encoding(const std::vector<PadlAttribute>& sorted) {
  std::string out;
  for (const auto& attr : sorted) {
    out += attr.name;
    if (const auto* s = std::get_if<std::string>(&attr.value)) {
      out += "=s:";
      out += *s;
    } else {
      char buf[40];
      std::snprintf(buf, sizeof buf, "=r:%.17g", std::get<double>(attr.value));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const PadlFingerprint& padl) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& attr : padl.attributes()) {
    nlohmann::json value;
    std::visit([&](const auto& v) { value = v; }, attr.value);
    attrs.push_back({{"name", attr.name}, {"value", value}});
  }
  return {{"attributes", attrs}, {"digest", padl.digest()}};
}

PadlFingerprint padl_from_json(const nlohmann::json& doc) {
  std::vector<PadlAttribute> attrs;
  try {
    for (const auto& a : doc.at("attributes")) {
      const auto& v = a.at("value");
      if (v.is_string()) {
        attrs.push_back({a.at("name").get<std::string>(), v.get<std::string>()});
      } else if (v.is_number()) {
        attrs.push_back({a.at("name").get<std::string>(), v.get<double>()});
      } else {
        fail(ErrorCode::Validation, "PADL attribute values must be strings or numbers");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Validation, std::string("malformed PADL fingerprint: ") + e.what());
  }
  PadlFingerprint padl(std::move(attrs));
  if (doc.contains("digest") && doc["digest"].get<std::string>() != padl.digest()) {
    fail(ErrorCode::Validation, "PADL digest does not match its attributes");
  }
  return padl;
}

}  // namespace cogsec
