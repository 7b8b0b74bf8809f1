#include "drowsy/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "drowsy/errors.hpp"
#include "drowsy/pgm.hpp"

namespace drowsy {

namespace fs = std::filesystem;

std::size_t Corpus::count(EyeLabel label) const {
  std::size_t n = 0;
  for (const EyeSample& s : samples)
    if (s.label == label) ++n;
  return n;
}

void SplitSpec::validate() const {
  if (fractions.size() < 2)
    throw std::invalid_argument("SplitSpec: need at least two fractions");
  double sum = 0.0;
  for (double f : fractions) {
    if (f <= 0.0 || f >= 1.0)
      throw std::invalid_argument("SplitSpec: every fraction must be in (0, 1)");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("SplitSpec: fractions must sum to 1");
}

std::array<float, 576> preprocess_to_input(const GrayImage& img) {
  const GrayImage eq = equalize_histogram(img);
  const GrayImage small = resize_bilinear(eq, 24, 24);
  std::array<float, 576> out{};
  for (int i = 0; i < 576; ++i) out[i] = static_cast<float>(small.data[i]) / 255.0f;
  return out;
}

Corpus load_corpus(const fs::path& root, std::vector<std::string>* skipped,
                   const std::string& origin) {
  const std::string tag = origin.empty() ? root.filename().string() : origin;
  Corpus corpus;

  // Canonical manifest order: (label, filename), closed first.
  const std::pair<EyeLabel, const char*> classes[] = {{EyeLabel::Closed, "closed"},
                                                      {EyeLabel::Open, "open"}};
  for (const auto& [label, dirname] : classes) {
    const fs::path dir = root / dirname;
    if (!fs::is_directory(dir))
      throw DataError("load_corpus: missing class directory " + dir.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".pgm")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    std::size_t loaded = 0;
    for (const fs::path& file : files) {
      try {
        const GrayImage img = read_pgm_file(file);
        corpus.samples.push_back({preprocess_to_input(img), label});
        corpus.manifest.push_back({file.string(), label, tag});
        ++loaded;
      } catch (const DataError& e) {
        std::cerr << "warning: skipping unreadable image " << file.string() << ": "
                  << e.what() << "\n";
        if (skipped) skipped->push_back(file.string());
      }
    }
    if (loaded == 0)
      throw DataError("load_corpus: class directory " + dir.string() +
                      " contains no loadable .pgm images");
  }
  return corpus;
}

std::vector<Corpus> split(const Corpus& corpus, const SplitSpec& spec) {
  spec.validate();
  if (corpus.samples.empty()) throw DataError("split: empty corpus");

  const std::size_t parts_n = spec.fractions.size();
  std::vector<Corpus> parts(parts_n);
  Rng rng(spec.seed);

  for (EyeLabel label : {EyeLabel::Closed, EyeLabel::Open}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i)
      if (corpus.samples[i].label == label) idx.push_back(i);
    if (idx.empty()) continue;

    rng.shuffle(idx);

    const double n = static_cast<double>(idx.size());
    std::size_t prev = 0;
    double cum = 0.0;
    for (std::size_t p = 0; p < parts_n; ++p) {
      cum += spec.fractions[p];
      const std::size_t bound =
          p + 1 == parts_n ? idx.size()
                           : static_cast<std::size_t>(std::floor(cum * n + 1e-9));
      if (bound == prev)
        throw DataError("split: part " + std::to_string(p) + " would hold no \"" +
                        to_string(label) + "\" samples");
      for (std::size_t k = prev; k < bound; ++k) {
        parts[p].samples.push_back(corpus.samples[idx[k]]);
        parts[p].manifest.push_back(corpus.manifest[idx[k]]);
      }
      prev = bound;
    }
  }
  return parts;
}

GrayImage synth_glyph(Rng& rng, EyeLabel label, const SynthParams& params) {
  GrayImage img(24, 24);
  const double bg = rng.uniform(95.0, 150.0);
  std::vector<double> canvas(576, bg);

  const double cx = 11.5 + rng.uniform(-1.5, 1.5);
  const double cy = 11.5 + rng.uniform(-1.5, 1.5);
  const double dark = rng.uniform(15.0, 55.0);

  if (label == EyeLabel::Open) {
    const double rx = rng.uniform(6.5, 9.5);
    const double ry = rng.uniform(3.5, 5.5);
    const double sclera = rng.uniform(205.0, 240.0);
    const double iris_r = rng.uniform(2.0, 3.2);
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 24; ++x) {
        const double px = x - cx, py = y - cy;
        const double e = (px / rx) * (px / rx) + (py / ry) * (py / ry);
        if (e <= 1.0) {
          double& v = canvas[static_cast<std::size_t>(y) * 24 + x];
          v = sclera;
          if (px * px + py * py <= iris_r * iris_r) v = dark;
        }
      }
    }
  } else {
    const double halfw = rng.uniform(6.5, 9.5);
    const double bend = rng.uniform(0.8, 2.2);
    const double thick = rng.uniform(0.8, 1.6);
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 24; ++x) {
        const double t = (x - cx) / halfw;
        if (std::abs(t) > 1.0) continue;
        const double arc_y = cy + bend * (t * t - 0.5);
        if (std::abs(y - arc_y) <= thick)
          canvas[static_cast<std::size_t>(y) * 24 + x] = dark;
      }
    }
  }

  for (int i = 0; i < 576; ++i)
    img.data[i] = clamp_round_u8(canvas[i] + rng.normal(0.0, params.noise_stddev));
  return img;
}

Corpus synth_corpus(int n_per_class, std::uint64_t seed, const SynthParams& params) {
  if (n_per_class < 1) throw std::invalid_argument("synth_corpus: n_per_class must be >= 1");

  Corpus corpus;
  Rng rng(seed);
  for (EyeLabel label : {EyeLabel::Closed, EyeLabel::Open}) {
    for (int k = 0; k < n_per_class; ++k) {
      const GrayImage glyph = synth_glyph(rng, label, params);
      corpus.samples.push_back({preprocess_to_input(glyph), label});
      std::ostringstream name;
      name << "synth://" << to_string(label) << "/" << std::setw(5) << std::setfill('0')
           << k;
      corpus.manifest.push_back({name.str(), label, "synth"});
    }
  }
  return corpus;
}

std::string manifest_csv(const Corpus& corpus) {
  std::ostringstream os;
  os << "path,label,origin\n";
  for (const ManifestEntry& e : corpus.manifest)
    os << e.path << "," << to_string(e.label) << "," << e.origin << "\n";
  return os.str();
}

}  // namespace drowsy
