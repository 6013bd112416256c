#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "bvm/spectral_field.hpp"

namespace bvm {

// smallest 5-smooth integer >= n (friendly FFT sizes)
int next_smooth(int n);

// values on the uniform grid x_m = m/M per axis (row-major for d=2);
// requires M >= 2K+1 so the cut is resolved without aliasing
Eigen::VectorXd synthesize(const SpectralField& f, int M);

// exact inverse of synthesize for band-limited data; requires M >= 2K+1
SpectralField analyze(const CutPtr& cut, const Eigen::VectorXd& grid, int M);

// coefficients of g(f) on the cut, computed by collocation on an M-per-axis
// grid; requires the dealiasing margin M >= 2(2K+1)
SpectralField pointwise_compose(const std::function<double(double)>& g,
                                const SpectralField& f, int M);

// "x,value" / "x,y,value" rows on the M-per-axis grid
std::string grid_to_csv(const SpectralField& f, int M);

}  // namespace bvm
