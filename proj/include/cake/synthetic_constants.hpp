#pragma once

// Frozen geometry of the synthetic families. Sizes and standard deviations
// are the published ones; centers are fixed here so that generated data is
// reproducible. Bump kSyntheticConstantsVersion whenever a value changes.

#include <array>
#include <cstddef>

namespace cake::synthetic {

inline constexpr int kSyntheticConstantsVersion = 1;

struct ClusterConstant {
    double cx;
    double cy;
    double stddev;
    std::size_t size;
};

// S1: three equal Gaussians, std 2.0, 4000 points.
inline constexpr std::array<ClusterConstant, 3> kS1 = {{
    {0.0, 0.0, 2.0, 1334},
    {8.0, 0.0, 2.0, 1333},
    {4.0, 6.928203230275509, 2.0, 1333},
}};

// S2: stds 2.0 / 2.5 / 1.5, 3000 points.
inline constexpr std::array<ClusterConstant, 3> kS2 = {{
    {0.0, 0.0, 2.0, 1000},
    {7.0, 0.0, 2.5, 1000},
    {3.5, 6.06217782649107, 1.5, 1000},
}};

// S3: three unit Gaussians (1000 each) plus 1500 uniform noise points drawn
// from the cluster-center bounding box padded by kS3NoisePad on every side.
inline constexpr std::array<ClusterConstant, 3> kS3 = {{
    {0.0, 0.0, 1.0, 1000},
    {6.0, 0.0, 1.0, 1000},
    {3.0, 5.196152422706632, 1.0, 1000},
}};
inline constexpr std::size_t kS3Noise = 1500;
inline constexpr double kS3NoisePad = 4.0;

// S4: four wide Gaussians on the corners of a square.
inline constexpr std::array<ClusterConstant, 4> kS4 = {{
    {-4.0, -4.0, 2.5, 750},
    {4.0, -4.0, 2.5, 750},
    {-4.0, 4.0, 2.5, 750},
    {4.0, 4.0, 2.5, 750},
}};

// S5: strong density contrast, stds 0.2 / 3.0 / 1.0.
inline constexpr std::array<ClusterConstant, 3> kS5 = {{
    {-6.0, 4.0, 0.2, 1334},
    {0.0, -2.0, 3.0, 1333},
    {6.0, 4.0, 1.0, 1333},
}};

// S6: sparse central cluster between two dense ones.
inline constexpr std::array<ClusterConstant, 3> kS6 = {{
    {-4.0, 0.0, 0.4, 1334},
    {0.0, 0.0, 2.5, 1333},
    {4.0, 0.0, 0.4, 1333},
}};

// S7: imbalanced sizes 500 / 1000 / 2500 with stds 0.3 / 1.5 / 2.5.
inline constexpr std::array<ClusterConstant, 3> kS7 = {{
    {-6.0, 3.0, 0.3, 500},
    {-3.0, -3.0, 1.5, 1000},
    {4.0, 0.0, 2.5, 2500},
}};

// Two moons: 1200 points in total, 3% of them uniform outliers.
inline constexpr std::size_t kMoonsTotal = 1200;
inline constexpr double kMoonsOutlierFraction = 0.03;
inline constexpr double kMoonsNoise = 0.06;
inline constexpr std::array<double, 4> kMoonsOutlierBox = {-1.5, 2.5, -1.0, 1.5};  // x0, x1, y0, y1

// Blobs: centers uniform in [-kBlobBox, kBlobBox]^d.
inline constexpr double kBlobBox = 10.0;
inline constexpr std::size_t kBlobDefaultPoints = 10000;

}  // namespace cake::synthetic
