#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "swt/error.hpp"
#include "swt/sfcrf.hpp"

namespace swt {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class BundleWriter {
public:
    explicit BundleWriter(fs::path dir) : dir_(std::move(dir)) {}

    void vec(const std::string& name, const std::vector<float>& v) {
        put(name, FeatureMap(1, static_cast<int>(v.size()), 1, v));
    }
    void linear(const std::string& name, const Linear& l) {
        put(name + ".weight", FeatureMap(l.out_features, l.in_features, 1, l.weight));
        vec(name + ".bias", l.bias);
    }
    void put(const std::string& name, const FeatureMap& f) {
        const std::string file = name + ".fmap";
        write_fmap(f, dir_ / file);
        entries_.emplace_back(name, file);
    }
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

class BundleReader {
public:
    BundleReader(fs::path dir, std::map<std::string, std::string> files)
        : dir_(std::move(dir)), files_(std::move(files)) {}

    FeatureMap get(const std::string& name) const {
        const auto it = files_.find("param." + name);
        if (it == files_.end()) {
            throw FormatError("parameter bundle is missing '" + name + "'");
        }
        return read_fmap(dir_ / it->second);
    }
    bool has(const std::string& name) const { return files_.contains("param." + name); }

    std::vector<float> vec(const std::string& name, int expected) const {
        const FeatureMap f = get(name);
        if (f.height() != 1 || f.channels() != 1 || f.width() != expected) {
            throw FormatError("parameter '" + name + "' has the wrong shape");
        }
        return {f.values().begin(), f.values().end()};
    }
    Linear linear(const std::string& name, int in, int out) const {
        const FeatureMap w = get(name + ".weight");
        if (w.height() != out || w.width() != in || w.channels() != 1) {
            throw FormatError("parameter '" + name + ".weight' has the wrong shape");
        }
        Linear l(in, out);
        l.weight.assign(w.values().begin(), w.values().end());
        l.bias = vec(name + ".bias", out);
        return l;
    }

private:
    fs::path dir_;
    std::map<std::string, std::string> files_;
};

void write_block(BundleWriter& w, const std::string& p, const BlockParams& bp) {
    w.linear(p + ".attn.q", bp.attn.q);
    w.linear(p + ".attn.k", bp.attn.k);
    w.linear(p + ".attn.v", bp.attn.v);
    w.linear(p + ".attn.out", bp.attn.out);
    w.vec(p + ".norm1.gain", bp.norm1.gain);
    w.vec(p + ".norm1.bias", bp.norm1.bias);
    w.vec(p + ".norm2.gain", bp.norm2.gain);
    w.vec(p + ".norm2.bias", bp.norm2.bias);
    w.linear(p + ".mlp.fc1", bp.mlp.fc1);
    w.linear(p + ".mlp.fc2", bp.mlp.fc2);
    // Kernel stored as a 3x3 map with one channel per feature channel.
    FeatureMap k(3, 3, bp.cpe.channels);
    for (int ch = 0; ch < bp.cpe.channels; ++ch) {
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                k.at(ky, kx, ch) = bp.cpe.tap(ch, ky, kx);
            }
        }
    }
    w.put(p + ".cpe.kernel", k);
    w.vec(p + ".cpe.bias", bp.cpe.bias);
}

BlockParams read_block(const BundleReader& r, const std::string& p, int c, int heads, int expansion) {
    BlockParams bp;
    bp.attn.q = r.linear(p + ".attn.q", c, c);
    bp.attn.k = r.linear(p + ".attn.k", c, c);
    bp.attn.v = r.linear(p + ".attn.v", c, c);
    bp.attn.out = r.linear(p + ".attn.out", c, c);
    bp.attn.heads = heads;
    bp.norm1.gain = r.vec(p + ".norm1.gain", c);
    bp.norm1.bias = r.vec(p + ".norm1.bias", c);
    bp.norm2.gain = r.vec(p + ".norm2.gain", c);
    bp.norm2.bias = r.vec(p + ".norm2.bias", c);
    bp.mlp.fc1 = r.linear(p + ".mlp.fc1", c, expansion * c);
    bp.mlp.fc2 = r.linear(p + ".mlp.fc2", expansion * c, c);
    const FeatureMap k = r.get(p + ".cpe.kernel");
    if (k.height() != 3 || k.width() != 3 || k.channels() != c) {
        throw FormatError("parameter '" + p + ".cpe.kernel' has the wrong shape");
    }
    bp.cpe = CpeParams(c);
    for (int ch = 0; ch < c; ++ch) {
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                bp.cpe.tap(ch, ky, kx) = k.at(ky, kx, ch);
            }
        }
    }
    bp.cpe.bias = r.vec(p + ".cpe.bias", c);
    bp.validate();
    return bp;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + std::to_string(v[i]);
    }
    return s;
}

int to_int(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(what);
        }
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw FormatError("manifest value for '" + what + "' is not an integer");
    }
}

int parse_int(const std::map<std::string, std::string>& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        throw FormatError("manifest is missing '" + key + "'");
    }
    return to_int(it->second, key);
}

} // namespace

void save_decoder_params(const DecoderParams& params, const DecoderConfig& cfg, const fs::path& dir) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create parameter directory '" + dir.string() + "': " + ec.message());
    }
    BundleWriter w(dir);
    for (int l = 0; l < cfg.levels; ++l) {
        const std::string p = "level" + std::to_string(l);
        const LevelParams& lp = params.levels.at(l);
        if (lp.fuse) {
            w.linear(p + ".fuse", *lp.fuse);
        }
        for (int b = 0; b < 2; ++b) {
            write_block(w, p + ".block" + std::to_string(b), lp.blocks[b]);
        }
    }
    w.linear("head", params.head);

    std::ofstream out(dir / "manifest.txt", std::ios::trunc);
    if (!out) {
        throw IoError("cannot write manifest in '" + dir.string() + "'");
    }
    out << "seed = " << cfg.seed << '\n'
        << "levels = " << cfg.levels << '\n'
        << "window = " << cfg.window << '\n'
        << "channels = " << join(cfg.channels) << '\n'
        << "expansion = " << cfg.expansion << '\n'
        << "heads = " << cfg.heads << '\n';
    for (const auto& [name, file] : w.entries()) {
        out << "param." << name << " = " << file << '\n';
    }
}

std::pair<DecoderParams, DecoderConfig> load_decoder_params(const fs::path& dir) {
    std::ifstream in(dir / "manifest.txt");
    if (!in) {
        throw IoError("cannot open manifest in '" + dir.string() + "'");
    }
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("manifest line without '=': " + line);
        }
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    DecoderConfig cfg;
    try {
        cfg.seed = std::stoull(kv.at("seed"));
    } catch (const std::exception&) {
        throw FormatError("manifest has no valid 'seed'");
    }
    cfg.levels = parse_int(kv, "levels");
    cfg.window = parse_int(kv, "window");
    cfg.expansion = parse_int(kv, "expansion");
    cfg.heads = parse_int(kv, "heads");
    cfg.channels.clear();
    {
        std::stringstream ss(kv.count("channels") ? kv["channels"] : "");
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            cfg.channels.push_back(to_int(trim(tok), "channels"));
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }

    const BundleReader r(dir, kv);
    DecoderParams params;
    params.levels.resize(static_cast<std::size_t>(cfg.levels));
    for (int l = 0; l < cfg.levels; ++l) {
        const std::string p = "level" + std::to_string(l);
        const int c = cfg.channels[l];
        const int heads = cfg.heads == 0 ? default_head_count(c) : cfg.heads;
        if (l + 1 < cfg.levels) {
            params.levels[l].fuse = r.linear(p + ".fuse", cfg.channels[l + 1] + c, c);
        }
        for (int b = 0; b < 2; ++b) {
            params.levels[l].blocks[b] = read_block(r, p + ".block" + std::to_string(b), c, heads, cfg.expansion);
        }
    }
    params.head = r.linear("head", cfg.channels[0], 1);
    return {std::move(params), cfg};
}

} // namespace swt
