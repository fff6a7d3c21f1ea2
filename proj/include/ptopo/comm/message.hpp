#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace ptopo::comm {

/// Element type code carried in every frame.
enum class ElementType : std::uint8_t {
  Bytes = 0,
  Int32 = 1,
  Int64 = 2,
  UInt64 = 3,
  Float64 = 4,
};

const char* to_string(ElementType t);
std::size_t element_size(ElementType t);

template <class T> constexpr ElementType element_type_of() {
  if constexpr (std::is_same_v<T, std::int32_t>) return ElementType::Int32;
  else if constexpr (std::is_same_v<T, std::int64_t>) return ElementType::Int64;
  else if constexpr (std::is_same_v<T, std::uint64_t>) return ElementType::UInt64;
  else if constexpr (std::is_same_v<T, double>) return ElementType::Float64;
  else return ElementType::Bytes;
}

class MessageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A tagged, typed payload. The payload is stored little-endian, which is the
/// host order on every platform we build for.
struct Message {
  int tag = 0;
  ElementType type = ElementType::Bytes;
  std::vector<std::byte> payload;

  std::size_t count() const { return payload.size() / element_size(type); }

  template <class T> static Message of(int tag, std::span<const T> values) {
    static_assert(std::is_trivially_copyable_v<T>);
    Message m;
    m.tag = tag;
    m.type = element_type_of<T>();
    m.payload.resize(values.size_bytes());
    if (!values.empty()) std::memcpy(m.payload.data(), values.data(), values.size_bytes());
    return m;
  }
  template <class T> static Message of(int tag, const std::vector<T>& values) {
    return of<T>(tag, std::span<const T>(values));
  }

  template <class T> std::vector<T> as() const {
    static_assert(std::is_trivially_copyable_v<T>);
    if (element_type_of<T>() != type)
      throw MessageError(std::string("payload element type mismatch: have ") + to_string(type) +
                         ", want " + to_string(element_type_of<T>()));
    if (payload.size() % sizeof(T) != 0) throw MessageError("payload size is not a multiple of element size");
    std::vector<T> out(payload.size() / sizeof(T));
    if (!out.empty()) std::memcpy(out.data(), payload.data(), payload.size());
    return out;
  }
};

/// Appends trivially copyable values to a byte buffer; used for compound
/// protocol payloads (type code Bytes).
class ByteWriter {
 public:
  template <class T> ByteWriter& put(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    auto old = buf_.size();
    buf_.resize(old + sizeof(T));
    std::memcpy(buf_.data() + old, &v, sizeof(T));
    return *this;
  }
  template <class T> ByteWriter& put_vector(const std::vector<T>& v) {
    put<std::uint64_t>(v.size());
    auto old = buf_.size();
    buf_.resize(old + v.size() * sizeof(T));
    if (!v.empty()) std::memcpy(buf_.data() + old, v.data(), v.size() * sizeof(T));
    return *this;
  }
  ByteWriter& put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    auto old = buf_.size();
    buf_.resize(old + s.size());
    if (!s.empty()) std::memcpy(buf_.data() + old, s.data(), s.size());
    return *this;
  }
  std::vector<std::byte> take() { return std::move(buf_); }
  Message message(int tag) {
    Message m;
    m.tag = tag;
    m.type = ElementType::Bytes;
    m.payload = take();
    return m;
  }

 private:
  std::vector<std::byte> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> data) : data_(data) {}

  template <class T> T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  template <class T> std::vector<T> get_vector() {
    auto n = get<std::uint64_t>();
    need(n * sizeof(T));
    std::vector<T> out(n);
    if (n) std::memcpy(out.data(), data_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return out;
  }
  std::string get_string() {
    auto n = get<std::uint64_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw MessageError("truncated payload");
  }
  std::span<const std::byte> data_;
  std::size_t pos_ = 0;
};

}  // namespace ptopo::comm
