#include "ptopo/comm/message.hpp"

namespace ptopo::comm {

const char* to_string(ElementType t) {
  switch (t) {
    case ElementType::Bytes: return "bytes";
    case ElementType::Int32: return "int32";
    case ElementType::Int64: return "int64";
    case ElementType::UInt64: return "uint64";
    case ElementType::Float64: return "float64";
  }
  return "unknown";
}

std::size_t element_size(ElementType t) {
  switch (t) {
    case ElementType::Bytes: return 1;
    case ElementType::Int32: return 4;
    case ElementType::Int64: return 8;
    case ElementType::UInt64: return 8;
    case ElementType::Float64: return 8;
  }
  throw MessageError("unknown element type code");
}

}  // namespace ptopo::comm
