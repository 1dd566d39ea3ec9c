#include "lmoa/core_types.hpp"

#include "lmoa/error.hpp"

namespace lmoa {

std::string to_string(const ImageShape& shape)
{
    return std::to_string(shape.height) + "x" + std::to_string(shape.width) + "x" + std::to_string(shape.channels);
}

ImageTensor::ImageTensor(ImageShape shape, std::vector<std::uint8_t> pixels)
    : shape_(shape), pixels_(std::move(pixels))
{
    if (shape_.channels != 1 && shape_.channels != 3)
        throw StructuralError("image must have 1 or 3 channels, got " + std::to_string(shape_.channels));
    if (pixels_.size() != shape_.size())
        throw StructuralError("image " + to_string(shape_) + " needs " + std::to_string(shape_.size()) +
                              " pixels, got " + std::to_string(pixels_.size()));
}

ImageTensor::ImageTensor(ImageShape shape, std::uint8_t fill)
    : ImageTensor(shape, std::vector<std::uint8_t>(shape.size(), fill))
{
}

SparseSolution::SparseSolution(std::vector<std::uint8_t> b, std::vector<double> r) : xb(std::move(b)), xr(std::move(r))
{
    if (xb.size() != xr.size())
        throw StructuralError("xb and xr lengths differ: " + std::to_string(xb.size()) + " vs " +
                              std::to_string(xr.size()));
    for (auto bit : xb)
        if (bit > 1) throw StructuralError("xb entries must be 0 or 1");
}

std::vector<double> effective_perturbation(const SparseSolution& s)
{
    if (s.xb.size() != s.xr.size())
        throw StructuralError("xb and xr lengths differ: " + std::to_string(s.xb.size()) + " vs " +
                              std::to_string(s.xr.size()));
    std::vector<double> x(s.xr.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (s.xb[i]) x[i] = s.xr[i];
    return x;
}

const char* to_string(Provenance p)
{
    switch (p) {
    case Provenance::initial: return "initial";
    case Provenance::genetic: return "genetic";
    case Provenance::model_based: return "model_based";
    }
    return "unknown";
}

} // namespace lmoa
