#ifndef AEHCL_CHECKPOINT_H_
#define AEHCL_CHECKPOINT_H_

#include <string>

#include "aehcl/parameter_store.h"

namespace aehcl {

// Binary checkpoint, little-endian:
//   magic "AEHCLCK1" | u32 count | count x { u32 name_len | name bytes |
//   u8 rank | u64 rows | u64 cols | rows*cols IEEE-754 binary64 values }
// Only values are stored; gradients load as zeros.
void save_checkpoint(const std::string& path, const ParameterStore& params);
ParameterStore load_checkpoint(const std::string& path);

}  // namespace aehcl

#endif  // AEHCL_CHECKPOINT_H_
