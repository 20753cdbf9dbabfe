#pragma once

#include "lfi/mdn.hpp"

#include <iosfwd>

namespace lfi::detail {

MdnDims read_dims(std::istream& in);
void write_dims_line(const char* tag, const MdnDims& d, std::ostream& out);
void write_vector(const Vector& v, std::ostream& out);
Vector read_vector(Index n, std::istream& in);

}  // namespace lfi::detail
