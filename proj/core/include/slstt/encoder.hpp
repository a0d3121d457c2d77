#pragma once

#include <utility>
#include <vector>

#include "slstt/image.hpp"
#include "slstt/rng.hpp"
#include "slstt/tensor.hpp"

namespace slstt {

/// Patch embedding geometry: square images cut into P x P patches, each
/// mapped to a D-dimensional token by a shared fully connected layer.
struct EmbedConfig {
    int image_side = 32;  // H = W
    int patch_side = 8;   // P
    int channels = 3;     // C
    int width = 16;       // D

    int grid() const { return image_side / patch_side; }
    int patch_count() const { return grid() * grid(); }        // N
    int patch_dim() const { return patch_side * patch_side * channels; }
    void validate() const;
};

/// Denominator of the attention logits: sqrt of the full width D, or of
/// the per-head width D/M (the conventional choice).
enum class AttnScale { SqrtWidth, SqrtHeadWidth };

struct EncoderConfig {
    int layers = 2;  // L_T
    int heads = 4;   // M
    int width = 16;  // D
    AttnScale scale = AttnScale::SqrtWidth;

    int head_width() const { return width / heads; }  // D_m
    double scale_denominator() const;
    void validate() const;
};

constexpr double kLayerNormEps = 1e-6;

/// Weight-init standard deviation for a given width. Anchored so the
/// reference transformer width (768) gets the conventional 0.02 while the
/// per-projection-pair forward gain width·std² stays width-invariant; at
/// small desk widths a flat 0.02 would shrink the class feature to ~1e-2
/// and freeze training at the class-prior saddle.
double init_stddev(int width);

/// One attention head's projections, each D x D_m plus a D_m bias.
struct AttentionHead {
    Tensor wq, bq, wk, bk, wv, bv;
};

struct EncoderLayerWeights {
    Tensor ln1_gamma, ln1_beta;
    std::vector<AttentionHead> heads;
    Tensor wo, bo;  // (M*D_m) x D projection of the concatenated heads
    Tensor ln2_gamma, ln2_beta;
    Tensor ff1_w, ff1_b;  // D x 4D
    Tensor ff2_w, ff2_b;  // 4D x D
};

/// Rows are patches in row-major patch order; each row is one patch
/// flattened by (row, column, channel). Output is N x (P^2 * C), off-tape.
Tensor patchify(const Image& img, const EmbedConfig& cfg);

/// Z_0 = [x_class; X_p^1 E; ...; X_p^N E] + E_pos, shape (N+1) x D.
Tensor embed(const Image& img, const Tensor& patch_w, const Tensor& patch_b,
             const Tensor& class_token, const Tensor& position, const EmbedConfig& cfg);

/// softmax(Q K^T / scale) row-stochastic attention matrix, n x n.
Tensor attention_matrix(const Tensor& z, const AttentionHead& head, double scale);

/// One head: softmax(Q K^T / scale) V, producing n x D_m.
Tensor self_attention(const Tensor& z, const AttentionHead& head, double scale);

/// Concatenated head outputs re-projected: Concat(SA_1..SA_M) W_O + b_O.
Tensor multi_head(const Tensor& z, const EncoderLayerWeights& w, double scale);

/// Pre-LN transformer block:
///   Z' = MSM(LN(Z)) + Z;  Z_out = FF(GELU(FF(LN(Z')))) + Z'.
Tensor encoder_layer(const Tensor& z, const EncoderLayerWeights& w, const EncoderConfig& cfg);

// ---------------------------------------------------------------------------
// Parameter store binding. Tensors live in a NamedTensors container under
// the names below; the bind helpers pull out (possibly tape-tracked) views.
//   embed.patch.weight/.bias, embed.class_token, embed.position
//   enc{l}.ln1.gamma/.beta, enc{l}.h{m}.wq/.bq/.wk/.bk/.wv/.bv,
//   enc{l}.attn_out.weight/.bias, enc{l}.ln2.gamma/.beta,
//   enc{l}.ff1.weight/.bias, enc{l}.ff2.weight/.bias
// ---------------------------------------------------------------------------

/// Fresh encoder parameters: weights from an init_stddev(width) normal
/// truncated at 2 sigma, biases zero, class token and position embedding
/// zero.
void init_encoder_params(NamedTensors& params, const EmbedConfig& ec, const EncoderConfig& cc,
                         Rng& rng);

EncoderLayerWeights bind_encoder_layer(const NamedTensors& params, int layer, int heads);

/// Full frame encoder: embed, then all encoder layers. Returns the final
/// class token state (row 0 of Z_{L_T}) and the full token matrix.
std::pair<Tensor, Tensor> encode_frame(const Image& img, const NamedTensors& params,
                                       const EmbedConfig& ec, const EncoderConfig& cc);

}  // namespace slstt
