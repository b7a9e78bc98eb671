#include "spikeforge/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spikeforge/csv.hpp"

namespace spikeforge {

namespace {

using nlohmann::json;

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

json load_model_json(const std::string& path, const std::string& kind)
{
    std::ifstream in(path);
    if (!in) throw state_error("cannot open model file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw state_error("model file " + path + " is not valid JSON: " + e.what());
    }
    if (j.value("format", std::string()) != "spikeforge-model")
        throw state_error("model file " + path + " has an unknown format tag");
    if (j.value("version", -1) != kModelFormatVersion)
        throw state_error("model file " + path + " has an unsupported version");
    if (j.value("kind", std::string()) != kind)
        throw state_error("model file " + path + " holds a '" +
                          j.value("kind", std::string()) + "' model, expected '" +
                          kind + "'");
    return j;
}

void write_model_json(const json& j, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw state_error("cannot write model file " + path);
    out << j.dump(2) << '\n';
    if (!out) throw state_error("short write on model file " + path);
}

json matrix_json(const MatrixRef& m)
{
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = matrix_to_base64(m);
    return j;
}

Matrix matrix_from_json(const json& j)
{
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    return matrix_from_base64(j.at("data").get<std::string>(), rows, cols);
}

json vector_json(const VectorRef& v)
{
    return matrix_json(v);
}

Vector vector_from_json(const json& j)
{
    const Matrix m = matrix_from_json(j);
    if (m.cols() != 1) throw state_error("expected a column vector in model file");
    return m.col(0);
}

json batchnorm_json(const BatchNorm& bn)
{
    json j;
    j["running_mean"] = vector_json(bn.running_mean);
    j["running_var"] = vector_json(bn.running_var);
    j["gamma"] = vector_json(bn.gamma);
    j["delta"] = vector_json(bn.delta);
    return j;
}

BatchNorm batchnorm_from_json(const json& j)
{
    BatchNorm bn;
    bn.running_mean = vector_from_json(j.at("running_mean"));
    bn.running_var = vector_from_json(j.at("running_var"));
    bn.gamma = vector_from_json(j.at("gamma"));
    bn.delta = vector_from_json(j.at("delta"));
    return bn;
}

json stal_to_json(const StalModel& m)
{
    json j;
    j["format"] = "spikeforge-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = "stal";
    j["variant"] = m.variant == StalVariant::kStacked ? "stacked" : "vanilla";
    j["omega"] = m.omega;
    j["channels"] = m.channels;
    j["hidden"] = m.hidden;
    j["psi"] = m.psi;
    j["alpha"] = double_to_hex(m.alpha);
    j["dropout_p"] = double_to_hex(m.dropout_p);
    j["phi"] = vector_json(m.phi);
    j["position_weights"] = vector_json(m.position_weights);
    if (m.variant == StalVariant::kStacked) {
        j["w1"] = matrix_json(m.w1);
        j["w2"] = matrix_json(m.w2);
        j["b1"] = vector_json(m.b1);
        j["b2"] = vector_json(m.b2);
        j["bn1"] = batchnorm_json(m.bn1);
        j["bn2"] = batchnorm_json(m.bn2);
    }
    return j;
}

StalModel stal_from_json(const json& j)
{
    StalModel m;
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "stacked")
        m.variant = StalVariant::kStacked;
    else if (variant == "vanilla")
        m.variant = StalVariant::kVanilla;
    else
        throw state_error("unknown STAL variant '" + variant + "'");
    m.omega = j.at("omega").get<Eigen::Index>();
    m.channels = j.at("channels").get<Eigen::Index>();
    m.hidden = j.at("hidden").get<Eigen::Index>();
    m.psi = j.at("psi").get<int>();
    m.alpha = double_from_hex(j.at("alpha").get<std::string>());
    m.dropout_p = double_from_hex(j.at("dropout_p").get<std::string>());
    m.phi = vector_from_json(j.at("phi"));
    m.position_weights = vector_from_json(j.at("position_weights"));
    if (m.variant == StalVariant::kStacked) {
        m.w1 = matrix_from_json(j.at("w1"));
        m.w2 = matrix_from_json(j.at("w2"));
        m.b1 = vector_from_json(j.at("b1"));
        m.b2 = vector_from_json(j.at("b2"));
        m.bn1 = batchnorm_from_json(j.at("bn1"));
        m.bn2 = batchnorm_from_json(j.at("bn2"));
    }
    return m;
}

json srnn_to_json(const SrnnModel& m)
{
    json j;
    j["format"] = "spikeforge-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = "srnn";
    j["d_in"] = m.d_in;
    j["n1"] = m.n1;
    j["beta"] = double_to_hex(m.beta);
    j["u_thr"] = double_to_hex(m.u_thr);
    j["tau"] = m.tau;
    j["surrogate_alpha"] = double_to_hex(m.surrogate_alpha);
    j["w_in"] = matrix_json(m.w_in);
    j["w_12"] = matrix_json(m.w_12);
    j["w_rec1"] = matrix_json(m.w_rec1);
    j["w_rec2"] = matrix_json(m.w_rec2);
    return j;
}

SrnnModel srnn_from_json(const json& j)
{
    SrnnModel m;
    m.d_in = j.at("d_in").get<Eigen::Index>();
    m.n1 = j.at("n1").get<Eigen::Index>();
    m.beta = double_from_hex(j.at("beta").get<std::string>());
    m.u_thr = double_from_hex(j.at("u_thr").get<std::string>());
    m.tau = j.at("tau").get<int>();
    m.surrogate_alpha = double_from_hex(j.at("surrogate_alpha").get<std::string>());
    m.w_in = matrix_from_json(j.at("w_in"));
    m.w_12 = matrix_from_json(j.at("w_12"));
    m.w_rec1 = matrix_from_json(j.at("w_rec1"));
    m.w_rec2 = matrix_from_json(j.at("w_rec2"));
    m.check();
    return m;
}

json forest_to_json(const ForestModel& m)
{
    json j;
    j["format"] = "spikeforge-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = "forest";
    j["n_features"] = m.n_features;
    j["n_trees"] = m.cfg.n_trees;
    j["max_depth"] = m.cfg.max_depth;
    j["seed"] = m.cfg.seed;
    json trees = json::array();
    for (const Tree& t : m.trees) {
        json nodes = json::array();
        for (const TreeNode& n : t.nodes) {
            json nj;
            nj["f"] = n.feature;
            nj["t"] = double_to_hex(n.threshold);
            nj["l"] = n.left;
            nj["r"] = n.right;
            nj["c"] = n.leaf_class;
            nodes.push_back(std::move(nj));
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

ForestModel forest_from_json(const json& j)
{
    ForestModel m;
    m.n_features = j.at("n_features").get<int>();
    m.cfg.n_trees = j.at("n_trees").get<int>();
    m.cfg.max_depth = j.at("max_depth").get<int>();
    m.cfg.seed = j.at("seed").get<std::uint64_t>();
    for (const json& tj : j.at("trees")) {
        Tree t;
        for (const json& nj : tj) {
            TreeNode n;
            n.feature = nj.at("f").get<int>();
            n.threshold = double_from_hex(nj.at("t").get<std::string>());
            n.left = nj.at("l").get<int>();
            n.right = nj.at("r").get<int>();
            n.leaf_class = nj.at("c").get<int>();
            t.nodes.push_back(n);
        }
        m.trees.push_back(std::move(t));
    }
    return m;
}

json pipeline_to_json(const ModalityPipeline& p)
{
    json j;
    j["format"] = "spikeforge-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = "pipeline";
    j["modality"] = to_string(p.modality);
    j["encoder"] = to_string(p.encoder);
    j["psi"] = p.psi;
    j["rate_seed"] = p.rate_seed;
    if (p.uses_stal()) j["stal"] = stal_to_json(p.stal);
    j["srnn"] = srnn_to_json(p.srnn);
    return j;
}

ModalityPipeline pipeline_from_json(const json& j)
{
    ModalityPipeline p;
    p.modality = modality_from_string(j.at("modality").get<std::string>());
    p.encoder = encoder_from_string(j.at("encoder").get<std::string>());
    p.psi = j.at("psi").get<int>();
    p.rate_seed = j.at("rate_seed").get<std::uint64_t>();
    if (p.uses_stal()) p.stal = stal_from_json(j.at("stal"));
    p.srnn = srnn_from_json(j.at("srnn"));
    return p;
}

json report_to_json(const EvalReport& r)
{
    json j;
    j["encoder"] = r.encoder;
    j["seed"] = r.seed;
    j["config_digest"] = r.config_digest;
    j["subject_accuracy"] = r.subject_metrics.accuracy;
    j["subject_auc"] = r.subject_metrics.auc;
    j["subject_macro_f1"] = r.subject_metrics.macro_f1;
    j["subject_mcc"] = r.subject_metrics.mcc;
    j["window_accuracy"] = r.window_accuracy;
    j["density_semg"] = r.density_semg;
    j["density_angle"] = r.density_angle;
    j["density_energy"] = r.density_energy;
    j["density_ensemble"] = r.density_ensemble;
    json folds = json::array();
    for (const FoldOutcome& f : r.folds) {
        json fj;
        fj["subject_id"] = f.subject_id;
        fj["truth"] = f.truth;
        fj["predicted"] = f.predicted;
        fj["clbp_fraction"] = f.clbp_fraction;
        fj["n_windows"] = f.n_windows;
        fj["correct_windows"] = f.correct_windows;
        fj["density_semg"] = f.density_semg;
        fj["density_angle"] = f.density_angle;
        fj["density_energy"] = f.density_energy;
        folds.push_back(std::move(fj));
    }
    j["folds"] = std::move(folds);
    return j;
}

EvalReport report_from_json(const json& j)
{
    EvalReport r;
    r.encoder = j.at("encoder").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_digest = j.value("config_digest", std::string());
    r.subject_metrics.accuracy = j.at("subject_accuracy").get<double>();
    r.subject_metrics.auc = j.at("subject_auc").get<double>();
    r.subject_metrics.macro_f1 = j.at("subject_macro_f1").get<double>();
    r.subject_metrics.mcc = j.at("subject_mcc").get<double>();
    r.window_accuracy = j.at("window_accuracy").get<double>();
    r.density_semg = j.at("density_semg").get<double>();
    r.density_angle = j.at("density_angle").get<double>();
    r.density_energy = j.at("density_energy").get<double>();
    r.density_ensemble = j.at("density_ensemble").get<double>();
    for (const json& fj : j.at("folds")) {
        FoldOutcome f;
        f.subject_id = fj.at("subject_id").get<std::string>();
        f.truth = fj.at("truth").get<int>();
        f.predicted = fj.at("predicted").get<int>();
        f.clbp_fraction = fj.at("clbp_fraction").get<double>();
        f.n_windows = fj.at("n_windows").get<std::size_t>();
        f.correct_windows = fj.at("correct_windows").get<std::size_t>();
        f.density_semg = fj.at("density_semg").get<double>();
        f.density_angle = fj.at("density_angle").get<double>();
        f.density_energy = fj.at("density_energy").get<double>();
        r.folds.push_back(std::move(f));
    }
    return r;
}

std::string fixed3(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

std::string double_to_hex(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double double_from_hex(const std::string& s)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw state_error("malformed hex-float '" + s + "' in model file");
    return v;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes)
{
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const std::uint32_t v = (static_cast<std::uint32_t>(bytes[i]) << 16) |
                                (static_cast<std::uint32_t>(bytes[i + 1]) << 8) |
                                bytes[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
        i += 3;
    }
    const std::size_t rem = bytes.size() - i;
    if (rem == 1) {
        const std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rem == 2) {
        const std::uint32_t v = (static_cast<std::uint32_t>(bytes[i]) << 16) |
                                (static_cast<std::uint32_t>(bytes[i + 1]) << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text)
{
    if (text.size() % 4 != 0)
        throw state_error("base64 payload length must be a multiple of 4");
    int decode[256];
    std::fill(std::begin(decode), std::end(decode), -1);
    for (int i = 0; i < 64; ++i)
        decode[static_cast<unsigned char>(kB64Alphabet[i])] = i;

    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pads = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            const char ch = text[i + k];
            if (ch == '=') {
                if (i + 4 != text.size() || k < 2)
                    throw state_error("misplaced base64 padding");
                vals[k] = 0;
                ++pads;
            } else {
                if (pads > 0) throw state_error("base64 data after padding");
                vals[k] = decode[static_cast<unsigned char>(ch)];
                if (vals[k] < 0) throw state_error("invalid base64 character");
            }
        }
        const std::uint32_t v =
            (static_cast<std::uint32_t>(vals[0]) << 18) |
            (static_cast<std::uint32_t>(vals[1]) << 12) |
            (static_cast<std::uint32_t>(vals[2]) << 6) |
            static_cast<std::uint32_t>(vals[3]);
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
        if (pads < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
        if (pads < 1) out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

std::string matrix_to_base64(const MatrixRef& m)
{
    std::vector<std::uint8_t> bytes;
    bytes.reserve(static_cast<std::size_t>(m.size()) * sizeof(double));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            std::uint64_t bits = 0;
            const double v = m(r, c);
            std::memcpy(&bits, &v, sizeof(bits));
            for (int b = 0; b < 8; ++b)
                bytes.push_back(static_cast<std::uint8_t>((bits >> (8 * b)) & 0xff));
        }
    return base64_encode(bytes);
}

Matrix matrix_from_base64(const std::string& text, Eigen::Index rows,
                          Eigen::Index cols)
{
    if (rows < 0 || cols < 0) throw state_error("negative matrix shape in model file");
    const std::vector<std::uint8_t> bytes = base64_decode(text);
    const auto expected = static_cast<std::size_t>(rows) *
                          static_cast<std::size_t>(cols) * sizeof(double);
    if (bytes.size() != expected)
        throw state_error("matrix payload size mismatch in model file");
    Matrix m(rows, cols);
    std::size_t at = 0;
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b)
                bits |= static_cast<std::uint64_t>(bytes[at++]) << (8 * b);
            double v = 0.0;
            std::memcpy(&v, &bits, sizeof(v));
            m(r, c) = v;
        }
    return m;
}

void save_stal_model(const StalModel& model, const std::string& path)
{
    write_model_json(stal_to_json(model), path);
}

StalModel load_stal_model(const std::string& path)
{
    return stal_from_json(load_model_json(path, "stal"));
}

void save_srnn_model(const SrnnModel& model, const std::string& path)
{
    write_model_json(srnn_to_json(model), path);
}

SrnnModel load_srnn_model(const std::string& path)
{
    return srnn_from_json(load_model_json(path, "srnn"));
}

void save_forest(const ForestModel& model, const std::string& path)
{
    write_model_json(forest_to_json(model), path);
}

ForestModel load_forest(const std::string& path)
{
    return forest_from_json(load_model_json(path, "forest"));
}

std::string pipeline_filename(Modality m)
{
    return std::string("pipeline_") + to_string(m) + ".json";
}

void save_pipeline(const ModalityPipeline& p, const std::string& path)
{
    write_model_json(pipeline_to_json(p), path);
}

ModalityPipeline load_pipeline(const std::string& path)
{
    return pipeline_from_json(load_model_json(path, "pipeline"));
}

void save_ensemble(const EnsembleModel& model, const std::string& dir,
                   std::uint64_t seed, const std::string& config_digest)
{
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    for (Modality m : {Modality::kSemg, Modality::kAngle, Modality::kEnergy})
        write_model_json(pipeline_to_json(model.pipeline(m)),
                         (base / pipeline_filename(m)).string());
    write_model_json(forest_to_json(model.forest), (base / "forest.json").string());

    json manifest;
    manifest["format"] = "spikeforge-ensemble";
    manifest["version"] = kModelFormatVersion;
    manifest["omega"] = model.omega;
    manifest["stride"] = model.stride;
    manifest["seed"] = seed;
    manifest["config_digest"] = config_digest;
    write_model_json(manifest, (base / "manifest.json").string());
}

EnsembleModel load_ensemble(const std::string& dir)
{
    const std::filesystem::path base(dir);
    std::ifstream in(base / "manifest.json");
    if (!in) throw state_error("cannot open ensemble manifest in " + dir);
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const std::exception& e) {
        throw state_error("ensemble manifest in " + dir + " is not valid JSON: " +
                          e.what());
    }
    if (manifest.value("format", std::string()) != "spikeforge-ensemble")
        throw state_error("directory " + dir + " does not hold an ensemble bundle");

    EnsembleModel model;
    model.omega = manifest.at("omega").get<Eigen::Index>();
    model.stride = manifest.at("stride").get<Eigen::Index>();
    for (Modality m : {Modality::kSemg, Modality::kAngle, Modality::kEnergy})
        model.pipeline(m) = pipeline_from_json(
            load_model_json((base / pipeline_filename(m)).string(), "pipeline"));
    model.forest = forest_from_json(
        load_model_json((base / "forest.json").string(), "forest"));
    return model;
}

std::string ensemble_manifest_digest(const std::string& dir)
{
    std::ifstream in(std::filesystem::path(dir) / "manifest.json");
    if (!in) throw state_error("cannot open ensemble manifest in " + dir);
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const std::exception& e) {
        throw state_error("ensemble manifest in " + dir + " is not valid JSON: " +
                          e.what());
    }
    return manifest.value("config_digest", std::string());
}

void write_report_json(const EvalReport& report, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw state_error("cannot write report " + path);
    out << report_to_json(report).dump(2) << '\n';
}

EvalReport read_report_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw state_error("cannot open report " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw state_error("report " + path + " is not valid JSON: " + e.what());
    }
    try {
        return report_from_json(j);
    } catch (const json::exception& e) {
        throw state_error("report " + path + " is missing fields: " + e.what());
    }
}

void write_report_csv(const EvalReport& report, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw state_error("cannot write report " + path);
    if (!report.config_digest.empty())
        out << "# config_digest=" << report.config_digest << '\n';
    out << "subject_id,truth,predicted,clbp_fraction,n_windows,correct_windows,"
           "density_semg,density_angle,density_energy\n";
    for (const FoldOutcome& f : report.folds) {
        out << f.subject_id << ',' << f.truth << ',' << f.predicted << ','
            << format_double(f.clbp_fraction) << ',' << f.n_windows << ','
            << f.correct_windows << ',' << format_double(f.density_semg) << ','
            << format_double(f.density_angle) << ','
            << format_double(f.density_energy) << '\n';
    }
}

void write_report_dat(const std::vector<EvalReport>& reports, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw state_error("cannot write report " + path);
    out << "# encoder accuracy auc macro_f1 mcc window_accuracy density_semg "
           "density_angle density_energy density_ensemble\n";
    for (const EvalReport& r : reports) {
        out << r.encoder << ' ' << format_double(r.subject_metrics.accuracy) << ' '
            << format_double(r.subject_metrics.auc) << ' '
            << format_double(r.subject_metrics.macro_f1) << ' '
            << format_double(r.subject_metrics.mcc) << ' '
            << format_double(r.window_accuracy) << ' '
            << format_double(r.density_semg) << ' ' << format_double(r.density_angle)
            << ' ' << format_double(r.density_energy) << ' '
            << format_double(r.density_ensemble) << '\n';
    }
}

std::string report_comparison_table(const std::vector<EvalReport>& reports)
{
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-14s %8s %8s %8s %8s %8s %8s %8s %8s\n",
                  "encoder", "acc", "auc", "f1", "mcc", "d_semg", "d_angle",
                  "d_energy", "d_ens");
    out << line;
    for (const EvalReport& r : reports) {
        std::snprintf(line, sizeof(line),
                      "%-14s %8s %8s %8s %8s %8s %8s %8s %8s\n", r.encoder.c_str(),
                      fixed3(r.subject_metrics.accuracy).c_str(),
                      fixed3(r.subject_metrics.auc).c_str(),
                      fixed3(r.subject_metrics.macro_f1).c_str(),
                      fixed3(r.subject_metrics.mcc).c_str(),
                      fixed3(r.density_semg).c_str(), fixed3(r.density_angle).c_str(),
                      fixed3(r.density_energy).c_str(),
                      fixed3(r.density_ensemble).c_str());
        out << line;
    }
    return out.str();
}

}  // namespace spikeforge
