#pragma once

#include <string>
#include <vector>

namespace sca {

// Row-major H x W x C intensity grid with values in [0,1].
struct ImageGrid {
    int height = 0;
    int width = 0;
    int channels = 3;
    std::vector<double> data;

    double at(int i, int j, int c) const {
        return data[(size_t(i) * width + j) * channels + c];
    }
    double& at(int i, int j, int c) {
        return data[(size_t(i) * width + j) * channels + c];
    }
};

// Reads an 8-bit PPM (binary P6 or ASCII P3) and scales intensities by 1/255.
ImageGrid load_ppm(const std::string& path);
ImageGrid parse_ppm(const std::string& bytes);

// Keeps every factor-th pixel along both axes, starting at index 0.
ImageGrid downsample(const ImageGrid& img, int factor);

// Pixel centers mapped onto [-1,1]: x_j = (j+1/2)/W*2-1 and likewise in y.
double pixel_center_x(int j, int width);
double pixel_center_y(int i, int height);

}  // namespace sca
