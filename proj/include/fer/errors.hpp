#pragma once

#include <stdexcept>
#include <string>

namespace fer {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

#define FER_DECLARE_ERROR(Name)                                             \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what_arg) : Error(what_arg) {}     \
    }

// geometry
FER_DECLARE_ERROR(DegenerateFace);
FER_DECLARE_ERROR(IndexOutOfRange);

// imaging
FER_DECLARE_ERROR(ImageTooSmall);
FER_DECLARE_ERROR(EmptyRegion);
FER_DECLARE_ERROR(CorruptImage);

// features
FER_DECLARE_ERROR(DegenerateSegment);

// mlp
FER_DECLARE_ERROR(ShapeMismatch);
FER_DECLARE_ERROR(BatchTooSmall);
FER_DECLARE_ERROR(LabelOutOfRange);
FER_DECLARE_ERROR(EmptyDataset);
FER_DECLARE_ERROR(CorruptModel);

// evaluation
FER_DECLARE_ERROR(InvalidFoldCount);
FER_DECLARE_ERROR(TooFewValues);
FER_DECLARE_ERROR(EmptyInput);

// data / serialization
FER_DECLARE_ERROR(IoError);
FER_DECLARE_ERROR(FormatVersionMismatch);
FER_DECLARE_ERROR(MalformedLandmarks);
FER_DECLARE_ERROR(MalformedManifest);

#undef FER_DECLARE_ERROR

}  // namespace fer
