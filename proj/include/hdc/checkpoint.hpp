#ifndef HDC_CHECKPOINT_HPP_
#define HDC_CHECKPOINT_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hdc/cascade.hpp"
#include "hdc/error.hpp"

namespace hdc {

/**
 * Checkpoint layout
 * -----------------
 * A text header of `key = value` lines, terminated by the line `end_header`,
 * followed immediately by the raw parameter payload:
 *
 *     hdc-checkpoint 1
 *     levels = 3
 *     input_dim = 32
 *     block_layers = 64;64;64          (levels separated by ';', widths by ',')
 *     embed_dim = 16,16,16
 *     lambda = 1,1,1
 *     hard_fraction = 100,50,20
 *     margin = 1
 *     seed = 1
 *     tensor level1.block1.weight 32 64
 *     tensor level1.block1.bias 1 64
 *     ...
 *     payload_doubles = 12345
 *     end_header
 *     <payload_doubles little-endian IEEE-754 binary64 values>
 *
 * Tensors appear in Parameters declaration order. Floats in the header are
 * written in shortest round-trip form.
 */
class MalformedCheckpointError : public Error {
 public:
  using Error::Error;
};

/// Header parses but the tensor shapes disagree with the declared config.
class CheckpointShapeError : public Error {
 public:
  using Error::Error;
};

void write_checkpoint(const CascadeModel& model, std::ostream& out);
CascadeModel read_checkpoint(std::istream& in);

/// Throws IoError when the file cannot be written.
void save_checkpoint(const CascadeModel& model, const std::filesystem::path& path);
/// Throws IoError, MalformedCheckpointError or CheckpointShapeError.
CascadeModel load_checkpoint(const std::filesystem::path& path);

}  // namespace hdc

#endif  // HDC_CHECKPOINT_HPP_
