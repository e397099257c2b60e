#ifndef TTV_REFERENCE_HPP
#define TTV_REFERENCE_HPP

#include "ttv/fuzzy.hpp"
#include "ttv/image.hpp"
#include "ttv/solvers.hpp"

namespace ttv::reference {

/// Serial, allocation-heavy counterparts of the production kernels, written
/// as plainly as possible (explicit padded borders, straight double loops,
/// the printed formulas). They exist to pin the parallel implementations
/// down in tests and benchmarks, not to be fast.

ImageGrid convolve(const ImageGrid& img, const Kernel2D& k);
VectorField central_gradient(const ImageGrid& img, double h = 1.0);
EdgeIndicatorField edge_indicator(const ImageGrid& img,
                                  const std::vector<FuzzyTemplate>& templates,
                                  const EdgeDetectorConfig& cfg = {});
ImageGrid tv_divergence(const ImageGrid& img, const EdgeIndicatorField& theta,
                        double eps_tv, FluxForm form = FluxForm::conservative);
double psnr(const ImageGrid& ref, const ImageGrid& test);
double mssim(const ImageGrid& ref, const ImageGrid& test, int window = 11);
double speckle_index(const ImageGrid& img, int window = 3);

}  // namespace ttv::reference

#endif
