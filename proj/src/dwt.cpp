#include "bbauth/dwt.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "bbauth/error.hpp"
#include "bbauth/simd.hpp"

namespace bbauth::dwt {

WaveletFilter WaveletFilter::from_lowpass(std::string name, std::vector<double> lowpass) {
    WaveletFilter f{std::move(name), std::move(lowpass), {}};
    const std::size_t len = f.lowpass.size();
    f.highpass.resize(len);
    for (std::size_t j = 0; j < len; ++j) {
        const double sign = j % 2 == 0 ? 1.0 : -1.0;
        f.highpass[j] = sign * f.lowpass[len - 1 - j];
    }
    return f;
}

const WaveletFilter& coif1() {
    static const WaveletFilter f = [] {
        const double s7 = std::sqrt(7.0);
        const double k = 1.0 / (16.0 * std::sqrt(2.0));
        return WaveletFilter::from_lowpass(
            "coif1", {k * (1.0 - s7), k * (5.0 + s7), k * (14.0 + 2.0 * s7), k * (14.0 - 2.0 * s7),
                      k * (1.0 - s7), k * (-3.0 + s7)});
    }();
    return f;
}

const WaveletFilter& filter_by_name(const std::string& name) {
    if (name == "coif1") return coif1();
    if (name == "haar") {
        static const WaveletFilter haar =
            WaveletFilter::from_lowpass("haar", {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
        return haar;
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown wavelet '" + name + "'");
}

DwtPair dwt_level1(std::span<const double> signal, const WaveletFilter& filter) {
    if (signal.size() < 2) throw Error(ErrorCode::SignalTooShort, "DWT needs at least 2 samples");
    const std::size_t n = signal.size();
    const std::size_t m = n + (n % 2);
    const std::size_t taps = filter.lowpass.size();

    // Periodic extension so every output is one contiguous dot product.
    std::vector<double> ext(m + taps, 0.0);
    for (std::size_t i = 0; i < ext.size(); ++i) {
        const std::size_t src = i % m;
        ext[i] = src < n ? signal[src] : 0.0;
    }
    DwtPair out;
    out.approx.resize(m / 2);
    out.detail.resize(m / 2);
    const auto& kern = simd::active();
    for (std::size_t k = 0; k < m / 2; ++k) {
        const double* window = ext.data() + 2 * k;
        out.approx[k] = kern.dot(filter.lowpass.data(), window, taps);
        out.detail[k] = kern.dot(filter.highpass.data(), window, taps);
    }
    return out;
}

std::vector<double> idwt_level1(const DwtPair& pair, const WaveletFilter& filter, std::size_t length) {
    if (pair.approx.size() != pair.detail.size()) {
        throw Error(ErrorCode::ShapeMismatch, "approximation and detail lengths differ");
    }
    const std::size_t m = 2 * pair.approx.size();
    if (length > m || length + 1 < m) throw Error(ErrorCode::ShapeMismatch, "length inconsistent with coefficients");
    std::vector<double> x(m, 0.0);
    const std::size_t taps = filter.lowpass.size();
    for (std::size_t k = 0; k < pair.approx.size(); ++k) {
        for (std::size_t j = 0; j < taps; ++j) {
            x[(2 * k + j) % m] += pair.approx[k] * filter.lowpass[j] + pair.detail[k] * filter.highpass[j];
        }
    }
    x.resize(length);
    return x;
}

UniformSeries recursive_average(const UniformSeries& matrix, std::size_t target) {
    if (matrix.cols() < target || target == 0) {
        throw Error(ErrorCode::TooFewColumns, std::to_string(matrix.cols()) + " columns, need at least " +
                                                  std::to_string(target));
    }
    std::vector<std::vector<double>> cols;
    for (std::size_t c = 0; c < matrix.cols(); ++c) cols.push_back(matrix.column(c));
    while (cols.size() > target) {
        std::vector<std::vector<double>> next(cols.size() - 1);
        for (std::size_t c = 0; c + 2 < cols.size(); ++c) {
            next[c].resize(matrix.rows());
            for (std::size_t r = 0; r < matrix.rows(); ++r) next[c][r] = 0.5 * (cols[c][r] + cols[c + 1][r]);
        }
        next.back() = std::move(cols.back());
        cols = std::move(next);
    }
    UniformSeries out(matrix.rows(), target);
    for (std::size_t c = 0; c < target; ++c) out.set_column(c, cols[c]);
    return out;
}

UniformSeries keystroke_third_channel(const DwtPair& pair) {
    if (pair.approx.size() != pair.detail.size()) {
        throw Error(ErrorCode::ShapeMismatch, "approximation and detail lengths differ");
    }
    UniformSeries out(pair.approx.size(), 3, {"cA", "cB", "mean"});
    for (std::size_t r = 0; r < pair.approx.size(); ++r) {
        out.at(r, 0) = pair.approx[r];
        out.at(r, 1) = pair.detail[r];
        out.at(r, 2) = 0.5 * (pair.approx[r] + pair.detail[r]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Images

std::vector<ModalityKind> ImageConfig::modalities(TaskKind task) {
    std::vector<ModalityKind> out;
    out.push_back(task == TaskKind::Keystroke ? ModalityKind::Keystroke : ModalityKind::Touch);
    for (ModalityKind m : kBackgroundSensors) out.push_back(m);
    return out;
}

std::size_t ImageConfig::length(TaskKind task, ModalityKind modality) const {
    if (auto t = lengths.find(task); t != lengths.end()) {
        if (auto m = t->second.find(modality); m != t->second.end()) return m->second;
    }
    return 2 * width;
}

std::size_t ImageConfig::strip_height(TaskKind task, ModalityKind modality) const {
    const std::size_t coeffs = (length(task, modality) + 1) / 2;
    return (coeffs + width - 1) / width;
}

std::size_t ImageConfig::image_height(TaskKind task) const {
    std::size_t h = 0;
    for (ModalityKind m : modalities(task)) h += strip_height(task, m);
    return h;
}

ImageConfig ImageConfig::from_training(const DatasetSplit& train, std::size_t width) {
    if (width == 0) throw Error(ErrorCode::ConfigInvalid, "image width must be positive");
    ImageConfig cfg;
    cfg.width = width;
    std::map<std::pair<TaskKind, ModalityKind>, std::pair<double, std::size_t>> acc;
    for (const auto& s : train.sessions) {
        for (ModalityKind m : modalities(s.task)) {
            if (!s.streams.has(m)) continue;
            auto& [sum, n] = acc[{s.task, m}];
            sum += static_cast<double>(s.streams.event_count(m));
            ++n;
        }
    }
    const std::size_t quantum = 2 * width;
    for (TaskKind task : kAllTasks) {
        for (ModalityKind m : modalities(task)) {
            std::size_t len = quantum;
            if (auto it = acc.find({task, m}); it != acc.end() && it->second.second > 0) {
                const double mean = it->second.first / static_cast<double>(it->second.second);
                const auto blocks = static_cast<std::size_t>(std::ceil(mean / static_cast<double>(quantum)));
                len = std::max<std::size_t>(1, blocks) * quantum;
            }
            cfg.lengths[task][m] = len;
        }
    }
    return cfg;
}

namespace {

/// Raw channels (time, values...) of one modality before the transform.
struct RawChannels {
    std::vector<double> times;
    std::vector<std::vector<double>> channels;
};

RawChannels raw_channels(const Session& session, ModalityKind m) {
    RawChannels raw;
    const auto& st = session.streams;
    if (m == ModalityKind::Keystroke) {
        if (!st.keystroke || st.keystroke->size() < 2) throw Error(ErrorCode::MissingModality, "keystroke");
        const auto& ev = *st.keystroke;
        raw.channels.resize(1);
        for (std::size_t i = 1; i < ev.size(); ++i) {
            raw.times.push_back(static_cast<double>(ev[i].timestamp));
            raw.channels[0].push_back(static_cast<double>(ev[i].timestamp - ev[i - 1].timestamp));
        }
    } else if (m == ModalityKind::Touch) {
        if (!st.touch || st.touch->empty()) throw Error(ErrorCode::MissingModality, "touch");
        raw.channels.resize(2);
        for (const auto& e : *st.touch) {
            raw.times.push_back(static_cast<double>(e.timestamp));
            raw.channels[0].push_back(e.x);
            raw.channels[1].push_back(e.y);
        }
    } else {
        auto it = st.sensors.find(m);
        if (it == st.sensors.end() || it->second.empty()) {
            throw Error(ErrorCode::MissingModality, std::string(to_string(m)));
        }
        raw.channels.resize(3);
        for (const auto& s : it->second) {
            raw.times.push_back(static_cast<double>(s.timestamp));
            raw.channels[0].push_back(s.x);
            raw.channels[1].push_back(s.y);
            raw.channels[2].push_back(s.z);
        }
    }
    return raw;
}

}  // namespace

ModalityImage task_image(const Session& session, const ImageConfig& config) {
    const WaveletFilter& filter = filter_by_name(config.filter);
    const auto modalities = ImageConfig::modalities(session.task);
    ModalityImage img;
    img.width = config.width;
    img.height = config.image_height(session.task);
    img.pixels.assign(img.height * img.width * 3, 0.0);

    std::size_t row0 = 0;
    for (std::size_t mi = 0; mi < modalities.size(); ++mi) {
        const ModalityKind m = modalities[mi];
        const RawChannels raw = raw_channels(session, m);
        const std::size_t len = config.length(session.task, m);

        std::vector<DwtPair> pairs;
        for (std::size_t c = 0; c < raw.channels.size(); ++c) {
            const auto resampled = resample_linear(raw.times, raw.channels[c], len);
            DwtPair p = dwt_level1(resampled, filter);
            p.sensor_index = c;
            p.modality_index = mi;
            pairs.push_back(std::move(p));
        }

        UniformSeries reduced;
        if (pairs.size() == 1) {
            reduced = keystroke_third_channel(pairs.front());
        } else {
            UniformSeries doubled(pairs.front().approx.size(), 2 * pairs.size());
            for (std::size_t c = 0; c < pairs.size(); ++c) {
                doubled.set_column(2 * c, pairs[c].approx);
                doubled.set_column(2 * c + 1, pairs[c].detail);
            }
            reduced = recursive_average(doubled, 3);
        }
        reduced = minmax_normalize(reduced);

        const std::size_t strip = config.strip_height(session.task, m);
        const UniformSeries filled = pad_or_truncate(reduced, strip * config.width);
        for (std::size_t k = 0; k < filled.rows(); ++k) {
            const std::size_t r = row0 + k / config.width;
            const std::size_t c = k % config.width;
            for (std::size_t ch = 0; ch < 3; ++ch) img.pixels[(r * img.width + c) * 3 + ch] = filled.at(k, ch);
        }
        row0 += strip;
    }
    return img;
}

double dwt_score(std::span<const ModalityImage> enroll, const ModalityImage& verify) {
    if (enroll.empty()) throw Error(ErrorCode::ShapeMismatch, "no enrollment images");
    for (const auto& e : enroll) {
        if (e.height != verify.height || e.width != verify.width || e.pixels.size() != verify.pixels.size()) {
            throw Error(ErrorCode::ShapeMismatch, "image shapes differ");
        }
    }
    if (verify.pixels.empty()) return 1.0;
    std::vector<double> mean(verify.pixels.size(), 0.0);
    const double w = 1.0 / static_cast<double>(enroll.size());
    for (const auto& e : enroll) simd::axpy(w, e.pixels, mean);
    const double d = simd::abs_diff_sum(mean, verify.pixels) / static_cast<double>(verify.pixels.size());
    return std::clamp(1.0 - d, 0.0, 1.0);
}

void write_image_text(std::ostream& out, const ModalityImage& image) {
    out << std::setprecision(6);
    for (std::size_t r = 0; r < image.height; ++r) {
        for (std::size_t c = 0; c < image.width; ++c) {
            if (c > 0) out << ' ';
            out << image.at(r, c, 0) << ',' << image.at(r, c, 1) << ',' << image.at(r, c, 2);
        }
        out << '\n';
    }
}

}  // namespace bbauth::dwt
