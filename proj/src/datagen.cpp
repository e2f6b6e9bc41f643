#include "tcm/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "tcm/error.hpp"
#include "tcm/rng.hpp"

namespace tcm {

EmbeddingDataset gaussian_mixture(const MixtureSpec& spec) {
    if (spec.class_count < 2) {
        throw Error(ErrorCode::InvalidSpec, "mixture needs class_count >= 2");
    }
    if (spec.samples_per_class < 1 || spec.dim < 1) {
        throw Error(ErrorCode::InvalidSpec, "mixture needs samples_per_class >= 1 and dim >= 1");
    }
    if (!(spec.noise_sigma > 0.0)) {
        throw Error(ErrorCode::InvalidSpec, "noise_sigma must be positive");
    }
    if (spec.center_separation < 0.0) {
        throw Error(ErrorCode::InvalidSpec, "center_separation must be non-negative");
    }

    const std::size_t c_count = static_cast<std::size_t>(spec.class_count);
    const std::size_t per_class = static_cast<std::size_t>(spec.samples_per_class);
    const std::size_t d = static_cast<std::size_t>(spec.dim);
    const std::size_t n = c_count * per_class;

    Rng rng(spec.seed);

    // Centers are uniform directions scaled to norm center_separation, so
    // inter-center distances are proportional to it for a fixed seed.
    Mat<double> centers(c_count, d);
    for (std::size_t c = 0; c < c_count; ++c) {
        double norm_sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            centers(c, j) = rng.normal();
            norm_sq += centers(c, j) * centers(c, j);
        }
        const double norm = std::sqrt(norm_sq);
        const double scale = norm > 1e-12 ? spec.center_separation / norm : 0.0;
        for (std::size_t j = 0; j < d; ++j) centers(c, j) *= scale;
    }

    EmbeddingDataset dataset;
    dataset.class_count = spec.class_count;
    dataset.features = FeatureMatrix(n, d);
    dataset.labels.resize(n);
    std::size_t row = 0;
    for (std::size_t c = 0; c < c_count; ++c) {
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            auto out = dataset.features.row(row);
            for (std::size_t j = 0; j < d; ++j) {
                out[j] = static_cast<float>(centers(c, j) + spec.noise_sigma * rng.normal());
            }
            dataset.labels[row] = static_cast<int>(c);
        }
    }
    return dataset;
}

int longtail_class_size(int per_class, double rho, int class_count, int class_id) {
    const double exponent = -static_cast<double>(class_id) / static_cast<double>(class_count - 1);
    return static_cast<int>(std::llround(per_class * std::pow(rho, exponent)));
}

EmbeddingDataset longtail_subsample(const EmbeddingDataset& dataset,
                                    const LongTailSpec& spec) {
    validate_dataset(dataset);
    const std::vector<int> counts = class_counts(dataset);
    const int per_class = counts[0];
    for (int c = 1; c < dataset.class_count; ++c) {
        if (counts[static_cast<std::size_t>(c)] != per_class) {
            throw Error(ErrorCode::InvalidSpec,
                        "longtail_subsample needs a class-balanced input; class " +
                            std::to_string(c) + " has " +
                            std::to_string(counts[static_cast<std::size_t>(c)]) +
                            " samples vs " + std::to_string(per_class));
        }
    }
    if (spec.imbalance_ratio < 1.0) {
        throw Error(ErrorCode::InvalidSpec, "imbalance_ratio must be >= 1");
    }
    if (spec.imbalance_ratio > static_cast<double>(per_class)) {
        throw Error(ErrorCode::InvalidSpec,
                    "imbalance_ratio " + std::to_string(spec.imbalance_ratio) +
                        " exceeds per-class count " + std::to_string(per_class));
    }

    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(dataset.class_count));
    for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
        by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(static_cast<int>(i));
    }

    Rng rng(spec.seed);
    std::vector<int> kept;
    for (int c = 0; c < dataset.class_count; ++c) {
        const int keep = longtail_class_size(per_class, spec.imbalance_ratio,
                                             dataset.class_count, c);
        auto& rows = by_class[static_cast<std::size_t>(c)];
        rng.partial_shuffle(rows, static_cast<std::size_t>(keep));
        kept.insert(kept.end(), rows.begin(), rows.begin() + keep);
    }
    std::sort(kept.begin(), kept.end());  // preserve original row order

    EmbeddingDataset out = subset_dataset(dataset, kept);
    return out;
}

namespace {

[[noreturn]] void format_error(const std::string& path, std::size_t line,
                               const std::string& what) {
    throw Error(ErrorCode::Format, path + ":" + std::to_string(line) + ": " + what);
}

float read_le_float(const unsigned char* bytes) {
    std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                         (static_cast<std::uint32_t>(bytes[1]) << 8) |
                         (static_cast<std::uint32_t>(bytes[2]) << 16) |
                         (static_cast<std::uint32_t>(bytes[3]) << 24);
    float value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
}

void write_le_float(float value, unsigned char* bytes) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    bytes[0] = static_cast<unsigned char>(bits & 0xff);
    bytes[1] = static_cast<unsigned char>((bits >> 8) & 0xff);
    bytes[2] = static_cast<unsigned char>((bits >> 16) & 0xff);
    bytes[3] = static_cast<unsigned char>((bits >> 24) & 0xff);
}

FeatureMatrix load_features_binary(std::ifstream& in, const std::string& path,
                                   const std::string& header) {
    std::istringstream hs(header);
    std::string magic, version;
    long long n = -1, d = -1;
    hs >> magic >> version >> n >> d;
    if (hs.fail() || n < 1 || d < 1) {
        format_error(path, 1, "malformed EMB header, expected 'EMB v1 N D'");
    }
    if (version != "v1") {
        format_error(path, 1, "unsupported EMB version '" + version + "'");
    }
    std::string trailing;
    if (hs >> trailing) {
        format_error(path, 1, "unexpected token '" + trailing + "' in EMB header");
    }

    FeatureMatrix features(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
    const std::size_t total = static_cast<std::size_t>(n) * static_cast<std::size_t>(d);
    std::vector<unsigned char> raw(total * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        const std::size_t got = static_cast<std::size_t>(in.gcount()) / (4 * static_cast<std::size_t>(d));
        format_error(path, 2 + got, "truncated payload: expected " + std::to_string(total) +
                                        " float32 values");
    }
    char extra;
    if (in.read(&extra, 1)) {
        format_error(path, 2 + static_cast<std::size_t>(n), "trailing bytes after payload");
    }
    for (std::size_t i = 0; i < total; ++i) {
        const float v = read_le_float(raw.data() + i * 4);
        if (!std::isfinite(v)) {
            format_error(path, 2 + i / static_cast<std::size_t>(d),
                         "non-finite feature value");
        }
        features.data()[i] = v;
    }
    return features;
}

FeatureMatrix load_features_csv(const std::string& path, const std::string& first_line,
                                std::ifstream& in) {
    std::vector<std::vector<float>> rows;
    std::string line = first_line;
    std::size_t line_no = 1;
    std::size_t dim = 0;
    bool pending = true;
    while (pending) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) {
            std::vector<float> row;
            std::size_t pos = 0;
            while (pos <= line.size()) {
                const std::size_t comma = line.find(',', pos);
                const std::string cell =
                    line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
                char* end = nullptr;
                const float v = std::strtof(cell.c_str(), &end);
                if (end == cell.c_str() || (end && *end != '\0')) {
                    format_error(path, line_no, "cannot parse float '" + cell + "'");
                }
                if (!std::isfinite(v)) {
                    format_error(path, line_no, "non-finite feature value");
                }
                row.push_back(v);
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            if (dim == 0) {
                dim = row.size();
            } else if (row.size() != dim) {
                format_error(path, line_no,
                             "row has " + std::to_string(row.size()) + " columns, expected " +
                                 std::to_string(dim));
            }
            rows.push_back(std::move(row));
        }
        pending = static_cast<bool>(std::getline(in, line));
        ++line_no;
    }
    if (rows.empty()) {
        format_error(path, 1, "no feature rows found");
    }
    FeatureMatrix features(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto out = features.row(i);
        for (std::size_t j = 0; j < dim; ++j) out[j] = rows[i][j];
    }
    return features;
}

}  // namespace

EmbeddingDataset load_embeddings(const std::string& features_path,
                                 const std::string& labels_path) {
    std::ifstream fin(features_path, std::ios::binary);
    if (!fin) {
        throw Error(ErrorCode::Io, "cannot open features file " + features_path);
    }
    std::string first_line;
    if (!std::getline(fin, first_line)) {
        format_error(features_path, 1, "empty features file");
    }
    if (!first_line.empty() && first_line.back() == '\r') first_line.pop_back();

    EmbeddingDataset dataset;
    if (first_line.rfind("EMB ", 0) == 0) {
        dataset.features = load_features_binary(fin, features_path, first_line);
    } else {
        dataset.features = load_features_csv(features_path, first_line, fin);
    }

    std::ifstream lin(labels_path);
    if (!lin) {
        throw Error(ErrorCode::Io, "cannot open labels file " + labels_path);
    }
    std::string line;
    std::size_t line_no = 0;
    long long declared_n = -1, declared_c = -1;
    bool saw_header = false;
    while (std::getline(lin, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            // Only trailing blank lines are tolerated.
            std::string rest;
            while (std::getline(lin, rest)) {
                if (!rest.empty() && rest.back() == '\r') rest.pop_back();
                ++line_no;
                if (!rest.empty()) {
                    format_error(labels_path, line_no, "blank line inside label list");
                }
            }
            break;
        }
        if (line_no == 1 && line.rfind("LAB ", 0) == 0) {
            std::istringstream hs(line);
            std::string magic, version;
            hs >> magic >> version >> declared_n >> declared_c;
            if (hs.fail() || version != "v1" || declared_n < 1 || declared_c < 2) {
                format_error(labels_path, 1, "malformed LAB header, expected 'LAB v1 N C'");
            }
            saw_header = true;
            continue;
        }
        char* end = nullptr;
        const long value = std::strtol(line.c_str(), &end, 10);
        if (end == line.c_str() || (end && *end != '\0')) {
            format_error(labels_path, line_no, "cannot parse label '" + line + "'");
        }
        if (value < 0) {
            format_error(labels_path, line_no, "negative label " + std::to_string(value));
        }
        dataset.labels.push_back(static_cast<int>(value));
    }

    if (dataset.labels.size() != dataset.features.rows()) {
        format_error(labels_path, line_no,
                     "label count " + std::to_string(dataset.labels.size()) +
                         " does not match " + std::to_string(dataset.features.rows()) +
                         " feature rows");
    }
    if (saw_header && declared_n != static_cast<long long>(dataset.labels.size())) {
        format_error(labels_path, 1,
                     "header declares N=" + std::to_string(declared_n) + " but file has " +
                         std::to_string(dataset.labels.size()) + " labels");
    }

    int max_label = 0;
    for (int label : dataset.labels) max_label = std::max(max_label, label);
    dataset.class_count = saw_header ? static_cast<int>(declared_c) : max_label + 1;

    try {
        validate_dataset(dataset);
    } catch (const Error& e) {
        throw Error(ErrorCode::Format, std::string("loaded dataset invalid: ") + e.what());
    }
    return dataset;
}

void save_embeddings(const EmbeddingDataset& dataset,
                     const std::string& features_path,
                     const std::string& labels_path) {
    validate_dataset(dataset);

    std::ofstream fout(features_path, std::ios::binary | std::ios::trunc);
    if (!fout) {
        throw Error(ErrorCode::Io, "cannot write features file " + features_path);
    }
    fout << "EMB v1 " << dataset.features.rows() << ' ' << dataset.features.cols() << '\n';
    std::vector<unsigned char> raw(dataset.features.data().size() * 4);
    for (std::size_t i = 0; i < dataset.features.data().size(); ++i) {
        write_le_float(dataset.features.data()[i], raw.data() + i * 4);
    }
    fout.write(reinterpret_cast<const char*>(raw.data()),
               static_cast<std::streamsize>(raw.size()));
    if (!fout) {
        throw Error(ErrorCode::Io, "failed writing features to " + features_path);
    }

    std::ofstream lout(labels_path, std::ios::trunc);
    if (!lout) {
        throw Error(ErrorCode::Io, "cannot write labels file " + labels_path);
    }
    lout << "LAB v1 " << dataset.labels.size() << ' ' << dataset.class_count << '\n';
    for (int label : dataset.labels) lout << label << '\n';
    if (!lout) {
        throw Error(ErrorCode::Io, "failed writing labels to " + labels_path);
    }
}

}  // namespace tcm
