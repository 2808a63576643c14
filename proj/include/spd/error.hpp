#ifndef SPD_ERROR_HPP
#define SPD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace spd {

enum class Errc {
    NotSquare,
    AsymmetryExceedsTolerance,
    NotPositiveDefinite,
    DimensionMismatch,
    WrongDimension,
    NoConvergence,
    SingularTransform,
    DegenerateDirection,
    EmptyInput,
    EmptyDataset,
    EmptyCluster,
    KTooLarge,
    MissingTruth,
    LengthMismatch,
    CenterSamplingExhausted,
    InvalidArgument,
    ParseError,
};

std::string_view errc_name(Errc code) noexcept;

/// True for failures of the numerics (as opposed to bad input).
bool is_numerical(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace spd

#endif
