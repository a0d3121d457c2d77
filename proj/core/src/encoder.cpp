#include "slstt/encoder.hpp"

#include <cmath>
#include <string>

#include "slstt/error.hpp"

namespace slstt {

void EmbedConfig::validate() const {
    require(image_side > 0 && patch_side > 0 && channels > 0 && width > 0,
            "embed config fields must be positive");
    require(image_side % patch_side == 0, "patch side must divide the image side");
    require(patch_count() >= 1, "need at least one patch");
}

double EncoderConfig::scale_denominator() const {
    return scale == AttnScale::SqrtWidth ? std::sqrt(static_cast<double>(width))
                                         : std::sqrt(static_cast<double>(head_width()));
}

void EncoderConfig::validate() const {
    require(layers >= 0 && heads > 0 && width > 0, "encoder config fields out of range");
    require(width % heads == 0, "head count must divide the width");
}

double init_stddev(int width) {
    require(width > 0, "width must be positive");
    return 0.02 * std::sqrt(768.0 / static_cast<double>(width));
}

Tensor patchify(const Image& img, const EmbedConfig& cfg) {
    cfg.validate();
    require(img.width == cfg.image_side && img.height == cfg.image_side &&
                img.channels == cfg.channels,
            "image does not match the embed config");
    const int g = cfg.grid(), p = cfg.patch_side, c = cfg.channels;
    std::vector<double> out;
    out.reserve(static_cast<size_t>(cfg.patch_count()) * cfg.patch_dim());
    for (int pr = 0; pr < g; ++pr)
        for (int pc = 0; pc < g; ++pc)
            for (int dy = 0; dy < p; ++dy)
                for (int dx = 0; dx < p; ++dx)
                    for (int ch = 0; ch < c; ++ch)
                        out.push_back(img.at(pc * p + dx, pr * p + dy, ch));
    return Tensor({cfg.patch_count(), cfg.patch_dim()}, std::move(out));
}

Tensor embed(const Image& img, const Tensor& patch_w, const Tensor& patch_b,
             const Tensor& class_token, const Tensor& position, const EmbedConfig& cfg) {
    require(patch_w.rank() == 2 && patch_w.dim(0) == cfg.patch_dim() &&
                patch_w.dim(1) == cfg.width,
            "patch weight shape mismatch");
    require(class_token.rank() == 1 && class_token.dim(0) == cfg.width,
            "class token shape mismatch");
    require(position.rank() == 2 && position.dim(0) == cfg.patch_count() + 1 &&
                position.dim(1) == cfg.width,
            "position embedding shape mismatch");
    Tensor xp = patchify(img, cfg);
    Tensor tokens = add_row_vector(matmul(xp, patch_w), patch_b);    // N x D
    Tensor cls = reshape(class_token, {1, cfg.width});
    return add(concat_rows({cls, tokens}), position);                // (N+1) x D
}

Tensor attention_matrix(const Tensor& z, const AttentionHead& head, double scale) {
    require(scale > 0.0, "attention scale must be positive");
    Tensor q = add_row_vector(matmul(z, head.wq), head.bq);
    Tensor k = add_row_vector(matmul(z, head.wk), head.bk);
    return softmax(slstt::scale(matmul(q, transpose(k)), 1.0 / scale), 1);
}

Tensor self_attention(const Tensor& z, const AttentionHead& head, double scale) {
    Tensor v = add_row_vector(matmul(z, head.wv), head.bv);
    return matmul(attention_matrix(z, head, scale), v);
}

Tensor multi_head(const Tensor& z, const EncoderLayerWeights& w, double scale) {
    require(!w.heads.empty(), "multi_head needs at least one head");
    std::vector<Tensor> outs;
    outs.reserve(w.heads.size());
    for (const auto& head : w.heads) outs.push_back(self_attention(z, head, scale));
    Tensor cat = outs.size() == 1 ? outs[0] : concat_cols(outs);
    return add_row_vector(matmul(cat, w.wo), w.bo);
}

Tensor encoder_layer(const Tensor& z, const EncoderLayerWeights& w, const EncoderConfig& cfg) {
    const double scale = cfg.scale_denominator();
    Tensor zp = add(multi_head(layer_norm(z, w.ln1_gamma, w.ln1_beta, kLayerNormEps), w, scale),
                    z);
    Tensor h = layer_norm(zp, w.ln2_gamma, w.ln2_beta, kLayerNormEps);
    h = gelu(add_row_vector(matmul(h, w.ff1_w), w.ff1_b));
    h = add_row_vector(matmul(h, w.ff2_w), w.ff2_b);
    return add(h, zp);
}

// ---------------------------------------------------------------------------
// Parameter binding
// ---------------------------------------------------------------------------

namespace {

std::string enc_prefix(int layer) { return "enc" + std::to_string(layer) + "."; }

}  // namespace

void init_encoder_params(NamedTensors& params, const EmbedConfig& ec, const EncoderConfig& cc,
                         Rng& rng) {
    ec.validate();
    cc.validate();
    require(ec.width == cc.width, "embed and encoder widths must agree");
    const int d = ec.width, dm = cc.head_width();
    const double std = init_stddev(d);
    auto w = [&](Shape shape) { return Tensor::truncated_normal(shape, rng, std, 2.0); };

    params.add("embed.patch.weight", w({ec.patch_dim(), d}));
    params.add("embed.patch.bias", Tensor::zeros({d}), /*decay=*/false);
    params.add("embed.class_token", Tensor::zeros({d}), /*decay=*/false);
    params.add("embed.position", Tensor::zeros({ec.patch_count() + 1, d}), /*decay=*/false);

    for (int l = 0; l < cc.layers; ++l) {
        const std::string p = enc_prefix(l);
        params.add(p + "ln1.gamma", Tensor::full({d}, 1.0), false);
        params.add(p + "ln1.beta", Tensor::zeros({d}), false);
        for (int m = 0; m < cc.heads; ++m) {
            const std::string h = p + "h" + std::to_string(m) + ".";
            params.add(h + "wq", w({d, dm}));
            params.add(h + "bq", Tensor::zeros({dm}), false);
            params.add(h + "wk", w({d, dm}));
            params.add(h + "bk", Tensor::zeros({dm}), false);
            params.add(h + "wv", w({d, dm}));
            params.add(h + "bv", Tensor::zeros({dm}), false);
        }
        params.add(p + "attn_out.weight", w({d, d}));
        params.add(p + "attn_out.bias", Tensor::zeros({d}), false);
        params.add(p + "ln2.gamma", Tensor::full({d}, 1.0), false);
        params.add(p + "ln2.beta", Tensor::zeros({d}), false);
        params.add(p + "ff1.weight", w({d, 4 * d}));
        params.add(p + "ff1.bias", Tensor::zeros({4 * d}), false);
        params.add(p + "ff2.weight", w({4 * d, d}));
        params.add(p + "ff2.bias", Tensor::zeros({d}), false);
    }
}

EncoderLayerWeights bind_encoder_layer(const NamedTensors& params, int layer, int heads) {
    const std::string p = enc_prefix(layer);
    EncoderLayerWeights w;
    w.ln1_gamma = params.get(p + "ln1.gamma");
    w.ln1_beta = params.get(p + "ln1.beta");
    for (int m = 0; m < heads; ++m) {
        const std::string h = p + "h" + std::to_string(m) + ".";
        w.heads.push_back(AttentionHead{params.get(h + "wq"), params.get(h + "bq"),
                                        params.get(h + "wk"), params.get(h + "bk"),
                                        params.get(h + "wv"), params.get(h + "bv")});
    }
    w.wo = params.get(p + "attn_out.weight");
    w.bo = params.get(p + "attn_out.bias");
    w.ln2_gamma = params.get(p + "ln2.gamma");
    w.ln2_beta = params.get(p + "ln2.beta");
    w.ff1_w = params.get(p + "ff1.weight");
    w.ff1_b = params.get(p + "ff1.bias");
    w.ff2_w = params.get(p + "ff2.weight");
    w.ff2_b = params.get(p + "ff2.bias");
    return w;
}

std::pair<Tensor, Tensor> encode_frame(const Image& img, const NamedTensors& params,
                                       const EmbedConfig& ec, const EncoderConfig& cc) {
    Tensor z = embed(img, params.get("embed.patch.weight"), params.get("embed.patch.bias"),
                     params.get("embed.class_token"), params.get("embed.position"), ec);
    for (int l = 0; l < cc.layers; ++l)
        z = encoder_layer(z, bind_encoder_layer(params, l, cc.heads), cc);
    return {row(z, 0), z};
}

}  // namespace slstt
