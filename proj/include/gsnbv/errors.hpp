#pragma once

#include <stdexcept>
#include <string>

namespace gsnbv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateDirection : Error {
    DegenerateDirection() : Error("look-at direction has near-zero length") {}
};

struct OnAxis : Error {
    OnAxis() : Error("point lies on the ring axis, bearing undefined") {}
};

struct EmptySamplingSpace : Error {
    EmptySamplingSpace() : Error("sampling space has zero measure") {}
};

struct EmptyMask : Error {
    EmptyMask() : Error("no fruit pixels in mask") {}
};

struct EmptyCurve : Error {
    EmptyCurve() : Error("surrounding curve is empty") {}
};

struct TooFewPoints : Error {
    TooFewPoints() : Error("not enough valid fruit depth pixels for pose estimation") {}
};

struct AlreadyMarked : Error {
    AlreadyMarked() : Error("ROI has already been marked on this grid") {}
};

struct EmptyQueue : Error {
    EmptyQueue() : Error("viewpoint queue is empty") {}
};

}  // namespace gsnbv
