#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bbauth/dataset.hpp"
#include "bbauth/preprocess.hpp"

namespace bbauth::dwt {

/// Orthonormal two-channel analysis filter pair.
struct WaveletFilter {
    std::string name;
    std::vector<double> lowpass;
    std::vector<double> highpass;

    /// Builds the high-pass taps by the quadrature-mirror rule
    /// hi[j] = (-1)^j lo[L-1-j].
    static WaveletFilter from_lowpass(std::string name, std::vector<double> lowpass);
};

/// Coiflet of order 1 (6 taps), built from its closed form in sqrt(7).
const WaveletFilter& coif1();

/// Looks up a filter by name ("coif1", "haar"). Throws ConfigInvalid.
const WaveletFilter& filter_by_name(const std::string& name);

struct DwtPair {
    std::vector<double> approx;  // c_A
    std::vector<double> detail;  // c_B
    std::size_t sensor_index = 0;
    std::size_t modality_index = 0;
};

/// Single-level periodized transform: c[k] = sum_j tap[j] * x[(2k + j) mod M],
/// where M is the signal length rounded up to even by one trailing zero.
/// Both outputs have ceil(n / 2) entries. Throws SignalTooShort for n < 2.
DwtPair dwt_level1(std::span<const double> signal, const WaveletFilter& filter);

/// Inverse of dwt_level1; `length` is the original signal length.
std::vector<double> idwt_level1(const DwtPair& pair, const WaveletFilter& filter, std::size_t length);

/// One pass maps [c1 .. cC] to [(c1+c2)/2, ..., (c_{C-2}+c_{C-1})/2, cC];
/// repeated until `target` columns remain. Throws TooFewColumns.
UniformSeries recursive_average(const UniformSeries& matrix, std::size_t target = 3);

/// [c_A, c_B, (c_A + c_B) / 2] for one-dimensional modalities.
UniformSeries keystroke_third_channel(const DwtPair& pair);

struct ModalityImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels;  // height x width x 3, row-major, channel fastest

    double at(std::size_t r, std::size_t c, std::size_t ch) const { return pixels[(r * width + c) * 3 + ch]; }
    friend bool operator==(const ModalityImage&, const ModalityImage&) = default;
};

struct ImageConfig {
    std::size_t width = 16;
    std::string filter = "coif1";
    /// Per task, per modality resampled signal length (even).
    std::map<TaskKind, std::map<ModalityKind, std::size_t>> lengths;

    /// Modalities rendered for a task, in strip order.
    static std::vector<ModalityKind> modalities(TaskKind task);
    std::size_t length(TaskKind task, ModalityKind modality) const;
    std::size_t strip_height(TaskKind task, ModalityKind modality) const;
    std::size_t image_height(TaskKind task) const;

    /// Lengths from mean training event counts, rounded up to a multiple of
    /// 2 * width so every strip is filled exactly.
    static ImageConfig from_training(const DatasetSplit& train, std::size_t width = 16);
};

/// DWT image of a session: one H_m x W strip per modality, stacked
/// vertically. Throws MissingModality.
ModalityImage task_image(const Session& session, const ImageConfig& config);

/// 1 - mean |verify - mean(enroll)| over pixels. Throws ShapeMismatch.
double dwt_score(std::span<const ModalityImage> enroll, const ModalityImage& verify);

/// Debug export: one text line per image row, pixels as "r,g,b" separated by spaces.
void write_image_text(std::ostream& out, const ModalityImage& image);

}  // namespace bbauth::dwt
