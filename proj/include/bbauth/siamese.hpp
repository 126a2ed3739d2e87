#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bbauth::siamese {

inline const std::vector<std::size_t> kDefaultLayerSizes = {400, 200, 100, 50};

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weight;  // out x in, row-major
    std::vector<double> bias;    // out

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct BatchNorm {
    std::vector<double> scale;
    std::vector<double> shift;
    std::vector<double> running_mean;
    std::vector<double> running_var;

    friend bool operator==(const BatchNorm&, const BatchNorm&) = default;
};

struct NetworkParams {
    std::size_t input_dim = 0;
    std::uint64_t seed = 0;
    BatchNorm norm;
    std::vector<DenseLayer> layers;

    std::size_t embedding_dim() const { return layers.empty() ? input_dim : layers.back().out; }
    std::size_t trainable_count() const;

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double margin = 1.0;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double bn_momentum = 0.1;
    double bn_epsilon = 1e-5;

    /// Throws ConfigInvalid.
    void validate() const;
    std::uint64_t hash() const;
};

struct Pair {
    std::vector<double> a;
    std::vector<double> b;
    int label = 0;  // 1 = same subject
};

using PairSet = std::vector<Pair>;

/// He-uniform weights (limit sqrt(6 / fan_in)), zero biases, identity batch norm.
NetworkParams init_network(std::size_t input_dim, std::uint64_t seed,
                           const std::vector<std::size_t>& layer_sizes = kDefaultLayerSizes);

enum class Mode { Train, Infer };

/// Embeds a batch of samples (rows). Train mode normalizes with batch
/// statistics; infer mode with the running statistics. Throws ShapeMismatch.
std::vector<std::vector<double>> forward(const NetworkParams& params,
                                         const std::vector<std::vector<double>>& batch, Mode mode,
                                         double bn_epsilon = 1e-5);

std::vector<double> embed(const NetworkParams& params, std::span<const double> x);

double contrastive_loss(double distance, int label, double margin);

/// Gradient of the mean contrastive loss over `pairs`, laid out like the
/// flattened trainable parameters (see flatten()).
struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};

LossAndGradient loss_and_gradient(const NetworkParams& params, std::span<const Pair> pairs,
                                  const TrainConfig& config);

/// Trainable parameters in a fixed order: bn scale, bn shift, then per layer weight, bias.
std::vector<double> flatten(const NetworkParams& params);
void unflatten(NetworkParams& params, std::span<const double> flat);

struct GradCheckOptions {
    double step = 1e-5;
    /// Negates the analytic gradient; used to show the check catches faults.
    bool corrupt_sign = false;
};

/// Max relative error between analytic and central-difference gradients.
double grad_check(const NetworkParams& params, std::span<const Pair> batch, const TrainConfig& config,
                  const GradCheckOptions& options = {});

struct TrainResult {
    NetworkParams params;
    std::vector<double> loss_per_epoch;
};

/// Mini-batch Adam. Throws DegeneratePairs when all labels agree, ConfigInvalid.
TrainResult train(const PairSet& pairs, const TrainConfig& config,
                  const std::vector<std::size_t>& layer_sizes = kDefaultLayerSizes);

/// exp(-mean Euclidean distance between the verify and enrollment embeddings).
double siamese_score(const NetworkParams& params, const std::vector<std::vector<double>>& enroll,
                     std::span<const double> verify);

/// (s - min) / (max - min); a constant list maps to 0.5.
std::vector<double> minmax_postprocess(std::span<const double> scores);

/// Positive pairs: every within-subject sample pair. Negative pairs: each
/// positive is matched by a pair across two random distinct subjects,
/// `negatives_per_positive` times.
PairSet make_pairs(const std::vector<std::vector<std::vector<double>>>& samples_by_subject,
                   std::uint64_t seed, double negatives_per_positive = 1.0);

void save_checkpoint(std::ostream& out, const NetworkParams& params, const TrainConfig& config);
/// Throws MalformedDocument on a bad header or shape.
NetworkParams load_checkpoint(std::istream& in);

}  // namespace bbauth::siamese
