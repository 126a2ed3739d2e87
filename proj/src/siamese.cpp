#include "bbauth/siamese.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bbauth/error.hpp"
#include "bbauth/rng.hpp"
#include "bbauth/simd.hpp"

namespace bbauth::siamese {

namespace {

/// Row-major N x dim matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
};

struct ForwardCache {
    Matrix xhat;                     // normalized input
    std::vector<double> inv_std;     // per input dim
    std::vector<Matrix> inputs;      // input of each dense layer
    std::vector<Matrix> preact;      // pre-activation of each dense layer
    std::vector<double> batch_mean;
    std::vector<double> batch_var;
};

Matrix run_forward(const NetworkParams& p, const Matrix& x, Mode mode, double eps, ForwardCache* cache) {
    const std::size_t n = x.rows;
    const std::size_t d = p.input_dim;
    Matrix y(n, d);
    std::vector<double> mean(d, 0.0);
    std::vector<double> var(d, 0.0);
    if (mode == Mode::Train) {
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < d; ++k) mean[k] += x.row(r)[k];
        }
        for (double& m : mean) m /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < d; ++k) {
                const double c = x.row(r)[k] - mean[k];
                var[k] += c * c;
            }
        }
        for (double& v : var) v /= static_cast<double>(n);
    } else {
        mean = p.norm.running_mean;
        var = p.norm.running_var;
    }
    std::vector<double> inv_std(d);
    for (std::size_t k = 0; k < d; ++k) inv_std[k] = 1.0 / std::sqrt(var[k] + eps);

    Matrix xhat(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < d; ++k) {
            const double h = (x.row(r)[k] - mean[k]) * inv_std[k];
            xhat.row(r)[k] = h;
            y.row(r)[k] = p.norm.scale[k] * h + p.norm.shift[k];
        }
    }
    if (cache != nullptr) {
        cache->xhat = xhat;
        cache->inv_std = inv_std;
        cache->batch_mean = mean;
        cache->batch_var = var;
        cache->inputs.clear();
        cache->preact.clear();
    }

    const auto& kern = simd::active();
    Matrix act = std::move(y);
    for (const auto& layer : p.layers) {
        Matrix z(n, layer.out);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t o = 0; o < layer.out; ++o) {
                z.row(r)[o] = kern.dot(layer.weight.data() + o * layer.in, act.row(r), layer.in) + layer.bias[o];
            }
        }
        Matrix a = z;
        for (double& v : a.data) v = std::max(0.0, v);
        if (cache != nullptr) {
            cache->inputs.push_back(std::move(act));
            cache->preact.push_back(std::move(z));
        }
        act = std::move(a);
    }
    return act;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t dim) {
    Matrix m(rows.size(), dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != dim) {
            throw Error(ErrorCode::ShapeMismatch, "sample has " + std::to_string(rows[r].size()) +
                                                      " features, network expects " + std::to_string(dim));
        }
        std::copy(rows[r].begin(), rows[r].end(), m.row(r));
    }
    return m;
}

Matrix pair_batch(std::span<const Pair> pairs, std::size_t dim) {
    Matrix m(2 * pairs.size(), dim);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (pairs[p].a.size() != dim || pairs[p].b.size() != dim) {
            throw Error(ErrorCode::ShapeMismatch, "pair sample dimension differs from network input");
        }
        std::copy(pairs[p].a.begin(), pairs[p].a.end(), m.row(p));
        std::copy(pairs[p].b.begin(), pairs[p].b.end(), m.row(pairs.size() + p));
    }
    return m;
}

double pair_loss(const Matrix& emb, std::span<const Pair> pairs, double margin) {
    const std::size_t np = pairs.size();
    const auto& kern = simd::active();
    double total = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        const double d = std::sqrt(kern.squared_distance(emb.row(p), emb.row(np + p), emb.cols));
        total += contrastive_loss(d, pairs[p].label, margin);
    }
    return total / static_cast<double>(np);
}

double batch_loss(const NetworkParams& params, std::span<const Pair> pairs, const TrainConfig& config) {
    const Matrix x = pair_batch(pairs, params.input_dim);
    const Matrix emb = run_forward(params, x, Mode::Train, config.bn_epsilon, nullptr);
    return pair_loss(emb, pairs, config.margin);
}

}  // namespace

std::size_t NetworkParams::trainable_count() const {
    std::size_t n = norm.scale.size() + norm.shift.size();
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::ConfigInvalid, "learning_rate must be > 0");
    if (epochs < 1) throw Error(ErrorCode::ConfigInvalid, "epochs must be >= 1");
    if (!(margin > 0.0)) throw Error(ErrorCode::ConfigInvalid, "margin must be > 0");
    if (batch_size < 1) throw Error(ErrorCode::ConfigInvalid, "batch_size must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "moment coefficients must lie in [0, 1)");
    }
}

std::uint64_t TrainConfig::hash() const {
    std::ostringstream s;
    s << std::setprecision(17) << learning_rate << ' ' << epochs << ' ' << batch_size << ' ' << margin << ' '
      << seed << ' ' << beta1 << ' ' << beta2 << ' ' << adam_epsilon << ' ' << bn_momentum << ' ' << bn_epsilon;
    return hash_string(s.str());
}

NetworkParams init_network(std::size_t input_dim, std::uint64_t seed, const std::vector<std::size_t>& layer_sizes) {
    if (input_dim == 0) throw Error(ErrorCode::ConfigInvalid, "input_dim must be >= 1");
    NetworkParams p;
    p.input_dim = input_dim;
    p.seed = seed;
    p.norm.scale.assign(input_dim, 1.0);
    p.norm.shift.assign(input_dim, 0.0);
    p.norm.running_mean.assign(input_dim, 0.0);
    p.norm.running_var.assign(input_dim, 1.0);
    Rng rng(seed);
    std::size_t fan_in = input_dim;
    for (std::size_t units : layer_sizes) {
        DenseLayer l;
        l.in = fan_in;
        l.out = units;
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        l.weight.resize(units * fan_in);
        for (double& w : l.weight) w = rng.uniform(-limit, limit);
        l.bias.assign(units, 0.0);
        p.layers.push_back(std::move(l));
        fan_in = units;
    }
    return p;
}

std::vector<std::vector<double>> forward(const NetworkParams& params, const std::vector<std::vector<double>>& batch,
                                         Mode mode, double bn_epsilon) {
    if (batch.empty()) return {};
    const Matrix emb = run_forward(params, to_matrix(batch, params.input_dim), mode, bn_epsilon, nullptr);
    std::vector<std::vector<double>> out(emb.rows);
    for (std::size_t r = 0; r < emb.rows; ++r) out[r].assign(emb.row(r), emb.row(r) + emb.cols);
    return out;
}

std::vector<double> embed(const NetworkParams& params, std::span<const double> x) {
    return forward(params, {std::vector<double>(x.begin(), x.end())}, Mode::Infer).front();
}

double contrastive_loss(double distance, int label, double margin) {
    if (label == 1) return distance * distance;
    const double gap = std::max(0.0, margin - distance);
    return gap * gap;
}

std::vector<double> flatten(const NetworkParams& params) {
    std::vector<double> flat;
    flat.reserve(params.trainable_count());
    flat.insert(flat.end(), params.norm.scale.begin(), params.norm.scale.end());
    flat.insert(flat.end(), params.norm.shift.begin(), params.norm.shift.end());
    for (const auto& l : params.layers) {
        flat.insert(flat.end(), l.weight.begin(), l.weight.end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

void unflatten(NetworkParams& params, std::span<const double> flat) {
    if (flat.size() != params.trainable_count()) throw Error(ErrorCode::ShapeMismatch, "parameter count differs");
    auto it = flat.begin();
    auto take = [&it](std::vector<double>& dst) {
        std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
        it += static_cast<std::ptrdiff_t>(dst.size());
    };
    take(params.norm.scale);
    take(params.norm.shift);
    for (auto& l : params.layers) {
        take(l.weight);
        take(l.bias);
    }
}

LossAndGradient loss_and_gradient(const NetworkParams& params, std::span<const Pair> pairs,
                                  const TrainConfig& config) {
    if (pairs.empty()) return {0.0, std::vector<double>(params.trainable_count(), 0.0)};
    const std::size_t np = pairs.size();
    const Matrix x = pair_batch(pairs, params.input_dim);
    ForwardCache cache;
    const Matrix emb = run_forward(params, x, Mode::Train, config.bn_epsilon, &cache);
    const auto& kern = simd::active();

    LossAndGradient out;
    out.loss = pair_loss(emb, pairs, config.margin);

    // d loss / d embedding
    Matrix grad(emb.rows, emb.cols);
    const double inv_np = 1.0 / static_cast<double>(np);
    std::vector<double> diff(emb.cols);
    for (std::size_t p = 0; p < np; ++p) {
        const double* ea = emb.row(p);
        const double* eb = emb.row(np + p);
        for (std::size_t k = 0; k < emb.cols; ++k) diff[k] = ea[k] - eb[k];
        double coeff = 0.0;
        if (pairs[p].label == 1) {
            coeff = 2.0;
        } else {
            const double d = std::sqrt(kern.sum_squares(diff.data(), diff.size()));
            if (d > 0.0 && d < config.margin) coeff = -2.0 * (config.margin - d) / d;
        }
        coeff *= inv_np;
        kern.axpy(coeff, diff.data(), grad.row(p), emb.cols);
        kern.axpy(-coeff, diff.data(), grad.row(np + p), emb.cols);
    }

    // Dense layers, last to first.
    std::vector<std::vector<double>> layer_w_grad(params.layers.size());
    std::vector<std::vector<double>> layer_b_grad(params.layers.size());
    for (std::size_t li = params.layers.size(); li-- > 0;) {
        const DenseLayer& l = params.layers[li];
        const Matrix& in = cache.inputs[li];
        const Matrix& z = cache.preact[li];
        auto& gw = layer_w_grad[li];
        auto& gb = layer_b_grad[li];
        gw.assign(l.weight.size(), 0.0);
        gb.assign(l.out, 0.0);
        Matrix gin(in.rows, l.in);
        for (std::size_t r = 0; r < in.rows; ++r) {
            for (std::size_t o = 0; o < l.out; ++o) {
                const double gz = z.row(r)[o] > 0.0 ? grad.row(r)[o] : 0.0;
                if (gz == 0.0) continue;
                gb[o] += gz;
                kern.axpy(gz, in.row(r), gw.data() + o * l.in, l.in);
                kern.axpy(gz, l.weight.data() + o * l.in, gin.row(r), l.in);
            }
        }
        grad = std::move(gin);
    }

    // Batch-norm affine parameters.
    const std::size_t d = params.input_dim;
    std::vector<double> g_scale(d, 0.0);
    std::vector<double> g_shift(d, 0.0);
    for (std::size_t r = 0; r < grad.rows; ++r) {
        for (std::size_t k = 0; k < d; ++k) {
            g_scale[k] += grad.row(r)[k] * cache.xhat.row(r)[k];
            g_shift[k] += grad.row(r)[k];
        }
    }

    out.gradient.reserve(params.trainable_count());
    out.gradient.insert(out.gradient.end(), g_scale.begin(), g_scale.end());
    out.gradient.insert(out.gradient.end(), g_shift.begin(), g_shift.end());
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        out.gradient.insert(out.gradient.end(), layer_w_grad[li].begin(), layer_w_grad[li].end());
        out.gradient.insert(out.gradient.end(), layer_b_grad[li].begin(), layer_b_grad[li].end());
    }
    return out;
}

double grad_check(const NetworkParams& params, std::span<const Pair> batch, const TrainConfig& config,
                  const GradCheckOptions& options) {
    auto analytic = loss_and_gradient(params, batch, config).gradient;
    if (options.corrupt_sign) {
        for (double& g : analytic) g = -g;
    }
    const std::vector<double> base = flatten(params);
    NetworkParams probe = params;
    std::vector<double> theta = base;
    double worst = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        theta[i] = base[i] + options.step;
        unflatten(probe, theta);
        const double up = batch_loss(probe, batch, config);
        theta[i] = base[i] - options.step;
        unflatten(probe, theta);
        const double down = batch_loss(probe, batch, config);
        theta[i] = base[i];
        const double numeric = (up - down) / (2.0 * options.step);
        const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-6});
        worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
    }
    return worst;
}

TrainResult train(const PairSet& pairs, const TrainConfig& config, const std::vector<std::size_t>& layer_sizes) {
    config.validate();
    if (pairs.empty()) throw Error(ErrorCode::DegeneratePairs, "no training pairs");
    const bool has_pos = std::any_of(pairs.begin(), pairs.end(), [](const Pair& p) { return p.label == 1; });
    const bool has_neg = std::any_of(pairs.begin(), pairs.end(), [](const Pair& p) { return p.label == 0; });
    if (!has_pos || !has_neg) throw Error(ErrorCode::DegeneratePairs, "need both positive and negative pairs");

    TrainResult result;
    result.params = init_network(pairs.front().a.size(), config.seed, layer_sizes);
    NetworkParams& params = result.params;
    std::vector<double> theta = flatten(params);
    std::vector<double> m(theta.size(), 0.0);
    std::vector<double> v(theta.size(), 0.0);
    std::uint64_t step = 0;

    Rng rng(derive_seed(config.seed, 0x5ea5e));
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Pair> batch;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(pairs[order[i]]);

            const auto lg = loss_and_gradient(params, batch, config);
            epoch_loss += lg.loss * static_cast<double>(batch.size());

            ++step;
            const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
            for (std::size_t i = 0; i < theta.size(); ++i) {
                const double g = lg.gradient[i];
                m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
                v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
                theta[i] -= config.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config.adam_epsilon);
            }

            // Running statistics come from the batch that produced this step.
            const Matrix xb = pair_batch(batch, params.input_dim);
            const double inv_rows = 1.0 / static_cast<double>(xb.rows);
            for (std::size_t k = 0; k < params.input_dim; ++k) {
                double mean = 0.0;
                for (std::size_t r = 0; r < xb.rows; ++r) mean += xb.row(r)[k];
                mean *= inv_rows;
                double var = 0.0;
                for (std::size_t r = 0; r < xb.rows; ++r) var += (xb.row(r)[k] - mean) * (xb.row(r)[k] - mean);
                var *= inv_rows;
                auto& rm = params.norm.running_mean[k];
                auto& rv = params.norm.running_var[k];
                rm = (1.0 - config.bn_momentum) * rm + config.bn_momentum * mean;
                rv = (1.0 - config.bn_momentum) * rv + config.bn_momentum * var;
            }
            unflatten(params, theta);
        }
        result.loss_per_epoch.push_back(epoch_loss / static_cast<double>(pairs.size()));
    }
    return result;
}

double siamese_score(const NetworkParams& params, const std::vector<std::vector<double>>& enroll,
                     std::span<const double> verify) {
    if (enroll.empty()) throw Error(ErrorCode::ShapeMismatch, "no enrollment samples");
    const auto e = forward(params, enroll, Mode::Infer);
    const auto v = embed(params, verify);
    double total = 0.0;
    for (const auto& x : e) total += std::sqrt(simd::squared_distance(x, v));
    return std::exp(-total / static_cast<double>(e.size()));
}

std::vector<double> minmax_postprocess(std::span<const double> scores) {
    std::vector<double> out(scores.begin(), scores.end());
    if (out.empty()) return out;
    const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
    const double l = *lo;
    const double h = *hi;
    if (!(h > l)) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    for (double& s : out) s = (s - l) / (h - l);
    return out;
}

PairSet make_pairs(const std::vector<std::vector<std::vector<double>>>& samples_by_subject, std::uint64_t seed,
                   double negatives_per_positive) {
    PairSet pairs;
    std::vector<std::size_t> populated;
    for (std::size_t s = 0; s < samples_by_subject.size(); ++s) {
        const auto& v = samples_by_subject[s];
        if (!v.empty()) populated.push_back(s);
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = i + 1; j < v.size(); ++j) pairs.push_back({v[i], v[j], 1});
        }
    }
    if (populated.size() < 2) return pairs;
    Rng rng(seed);
    const auto negatives = static_cast<std::size_t>(std::llround(static_cast<double>(pairs.size()) * negatives_per_positive));
    for (std::size_t n = 0; n < negatives; ++n) {
        const std::size_t s1 = populated[rng.below(populated.size())];
        std::size_t s2 = populated[rng.below(populated.size() - 1)];
        if (s2 == s1) s2 = populated.back();
        const auto& a = samples_by_subject[s1];
        const auto& b = samples_by_subject[s2];
        pairs.push_back({a[rng.below(a.size())], b[rng.below(b.size())], 0});
    }
    return pairs;
}

void save_checkpoint(std::ostream& out, const NetworkParams& params, const TrainConfig& config) {
    auto write_vec = [&out](const char* tag, const std::vector<double>& v) {
        out << tag << ' ' << v.size();
        for (double x : v) out << ' ' << x;
        out << '\n';
    };
    out << std::setprecision(17);
    out << "bbauth-siamese 1\n";
    out << "seed " << params.seed << '\n';
    out << "config_hash " << std::hex << config.hash() << std::dec << '\n';
    out << "input_dim " << params.input_dim << '\n';
    out << "layers " << params.layers.size();
    for (const auto& l : params.layers) out << ' ' << l.out;
    out << '\n';
    write_vec("bn_scale", params.norm.scale);
    write_vec("bn_shift", params.norm.shift);
    write_vec("bn_running_mean", params.norm.running_mean);
    write_vec("bn_running_var", params.norm.running_var);
    for (const auto& l : params.layers) {
        write_vec("weight", l.weight);
        write_vec("bias", l.bias);
    }
}

NetworkParams load_checkpoint(std::istream& in) {
    auto fail = [](const std::string& what) -> void { throw Error(ErrorCode::MalformedDocument, "checkpoint: " + what); };
    auto expect = [&](const std::string& tag) {
        std::string t;
        if (!(in >> t) || t != tag) fail("expected '" + tag + "'");
    };
    auto read_vec = [&](const std::string& tag, std::size_t expected) {
        expect(tag);
        std::size_t n = 0;
        if (!(in >> n) || n != expected) fail(tag + " has the wrong size");
        std::vector<double> v(n);
        for (double& x : v) {
            if (!(in >> x)) fail("truncated " + tag);
        }
        return v;
    };
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "bbauth-siamese" || version != 1) fail("unknown header");
    NetworkParams p;
    std::string hash;
    expect("seed");
    in >> p.seed;
    expect("config_hash");
    in >> hash;
    expect("input_dim");
    in >> p.input_dim;
    expect("layers");
    std::size_t count = 0;
    in >> count;
    if (!in || count > 64) fail("bad layer count");
    std::vector<std::size_t> sizes(count);
    for (auto& s : sizes) in >> s;
    if (!in) fail("bad layer sizes");
    p.norm.scale = read_vec("bn_scale", p.input_dim);
    p.norm.shift = read_vec("bn_shift", p.input_dim);
    p.norm.running_mean = read_vec("bn_running_mean", p.input_dim);
    p.norm.running_var = read_vec("bn_running_var", p.input_dim);
    std::size_t fan_in = p.input_dim;
    for (std::size_t units : sizes) {
        DenseLayer l;
        l.in = fan_in;
        l.out = units;
        l.weight = read_vec("weight", units * fan_in);
        l.bias = read_vec("bias", units);
        p.layers.push_back(std::move(l));
        fan_in = units;
    }
    return p;
}

}  // namespace bbauth::siamese
