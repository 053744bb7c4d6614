#pragma once

#include <cstdint>
#include <string>

namespace nsfc::util {

// SHA-1 of a byte string, lowercase hex.
std::string sha1_hex(const std::string& data);

// Hash of a file's contents in git blob form ("blob <len>\0<data>").
std::string git_blob_sha1(const std::string& data);

}  // namespace nsfc::util
