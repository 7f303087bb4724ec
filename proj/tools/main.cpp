#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "resvoc/codebook_io.hpp"
#include "resvoc/errors.hpp"
#include "resvoc/pipeline.hpp"
#include "resvoc/track_io.hpp"
#include "resvoc/wav_io.hpp"

namespace {

std::string format_report(const resvoc::MetricsReport& m) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "segmental_snr_db %.6f\n", m.segmental_snr_db);
  out += buf;
  std::snprintf(buf, sizeof buf, "log_spectral_distortion_db %.6f\n", m.log_spectral_distortion_db);
  out += buf;
  std::snprintf(buf, sizeof buf, "mean_rn_selection_error %.9g\n", m.mean_rn_selection_error);
  out += buf;
  std::snprintf(buf, sizeof buf, "energy_hole_count %d\n", m.energy_hole_count);
  out += buf;
  std::snprintf(buf, sizeof buf, "voiced_frame_count %d\n", m.voiced_frame_count);
  out += buf;
  std::snprintf(buf, sizeof buf, "unvoiced_span_count %d\n", m.unvoiced_span_count);
  out += buf;
  return out;
}

resvoc::Waveform read_input_wav(const std::string& path) {
  std::string warning;
  resvoc::Waveform w = resvoc::read_wav(path, 16000, &warning);
  if (!warning.empty()) std::fprintf(stderr, "warning: %s\n", warning.c_str());
  return w;
}

std::vector<std::string> list_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  if (!fs::is_directory(dir)) throw resvoc::io_error("train: corpus path is not a directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".wav") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw resvoc::io_error("cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw resvoc::io_error("write failed for " + path);
}

int run(int argc, char** argv) {
  CLI::App app{"residual-codebook vocoder"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "build codebooks from a directory of wav files");
  std::string corpus_dir, out_path, full_out;
  int k = 100, n_closest = 10;
  uint64_t seed = 0;
  train_cmd->add_option("--corpus", corpus_dir, "directory of training wav files")->required();
  train_cmd->add_option("--out", out_path, "compressed codebook output")->required();
  train_cmd->add_option("--k", k, "centroid count");
  train_cmd->add_option("--n", n_closest, "frames ranked per centroid");
  train_cmd->add_option("--seed", seed, "clustering seed");
  train_cmd->add_option("--full-out", full_out, "also write the uncompressed codebook here");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "extract a synthesis track from a wav file");
  std::string in_path, track_out;
  analyze_cmd->add_option("--in", in_path, "input wav")->required();
  analyze_cmd->add_option("--track-out", track_out, "track file output")->required();

  // copy-synth
  auto* copy_cmd = app.add_subcommand("copy-synth", "analyze a wav and resynthesize it");
  std::string copy_in, copy_cb, copy_mode = "compressed", copy_out, copy_report;
  uint64_t copy_seed = 0;
  copy_cmd->add_option("--in", copy_in, "input wav")->required();
  copy_cmd->add_option("--codebook", copy_cb, "codebook file (full/compressed modes)");
  copy_cmd->add_option("--mode", copy_mode, "full, compressed or pulse");
  copy_cmd->add_option("--out", copy_out, "output wav")->required();
  copy_cmd->add_option("--report", copy_report, "also write the metrics report here");
  copy_cmd->add_option("--seed", copy_seed, "noise seed");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "render a track file through a codebook");
  std::string synth_track, synth_cb, synth_out;
  uint64_t synth_seed = 0;
  synth_cmd->add_option("--track", synth_track, "track file")->required();
  synth_cmd->add_option("--codebook", synth_cb, "codebook file")->required();
  synth_cmd->add_option("--out", synth_out, "output wav")->required();
  synth_cmd->add_option("--seed", synth_seed, "noise seed");

  // pca
  auto* pca_cmd = app.add_subcommand("pca", "export the eigen decomposition of a codebook");
  std::string pca_cb, eigen_out;
  pca_cmd->add_option("--codebook", pca_cb, "codebook file with a PCA block")->required();
  pca_cmd->add_option("--eigen-out", eigen_out, "CSV output")->required();

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "compare two wav files");
  std::string ref_path, test_path;
  metrics_cmd->add_option("--ref", ref_path, "reference wav")->required();
  metrics_cmd->add_option("--test", test_path, "wav under test")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the usage message
    return code == 0 ? 0 : 1;
  }

  if (train_cmd->parsed()) {
    const std::vector<std::string> paths = list_corpus(corpus_dir);
    if (paths.empty())
      throw std::invalid_argument("train: no wav files in " + corpus_dir +
                                  ", 0 usable residual frames");
    std::vector<resvoc::Waveform> corpus;
    corpus.reserve(paths.size());
    for (const std::string& p : paths) corpus.push_back(read_input_wav(p));
    resvoc::TrainResult result = resvoc::train(corpus, k, n_closest, seed);
    resvoc::save_codebook(out_path, result.compressed, &result.pca);
    if (!full_out.empty()) resvoc::save_codebook(full_out, result.full, &result.pca);
    std::printf("trained on %zu utterances, %d entries, digest %016llx\n", corpus.size(),
                static_cast<int>(result.compressed.entries.size()),
                static_cast<unsigned long long>(result.compressed.meta.corpus_digest));
    return 0;
  }

  if (analyze_cmd->parsed()) {
    const resvoc::Waveform w = read_input_wav(in_path);
    const resvoc::Analysis a = resvoc::analyze(w);
    resvoc::save_track(track_out, a.track, a.envelope);
    return 0;
  }

  if (copy_cmd->parsed()) {
    resvoc::SynthMode mode;
    if (copy_mode == "full") {
      mode = resvoc::SynthMode::full;
    } else if (copy_mode == "compressed") {
      mode = resvoc::SynthMode::compressed;
    } else if (copy_mode == "pulse") {
      mode = resvoc::SynthMode::pulse;
    } else {
      std::fprintf(stderr, "error: --mode must be full, compressed or pulse\n");
      return 1;
    }
    if (mode == resvoc::SynthMode::pulse) {
      if (!copy_cb.empty()) std::fprintf(stderr, "warning: pulse mode ignores --codebook\n");
    } else if (copy_cb.empty()) {
      std::fprintf(stderr, "error: --codebook is required for mode %s\n", copy_mode.c_str());
      return 1;
    }
    const resvoc::Waveform w = read_input_wav(copy_in);
    resvoc::LoadedCodebook loaded;
    const resvoc::Codebook* cb = nullptr;
    if (mode != resvoc::SynthMode::pulse) {
      loaded = resvoc::load_codebook(copy_cb);
      cb = &loaded.cb;
    }
    auto [y, report] = resvoc::copy_synthesis(w, cb, mode, copy_seed);
    resvoc::write_wav(copy_out, y);
    const std::string text = format_report(report);
    std::fputs(text.c_str(), stdout);
    if (!copy_report.empty()) write_text(copy_report, text);
    return 0;
  }

  if (synth_cmd->parsed()) {
    const resvoc::LoadedTrack lt = resvoc::load_track(synth_track);
    const resvoc::LoadedCodebook lc = resvoc::load_codebook(synth_cb);
    auto [excitation, report] = resvoc::build_excitation(lt.track, &lc.cb,
                                                         resvoc::ExcitationMode::codebook, synth_seed);
    (void)report;
    const resvoc::Waveform y = resvoc::synth_filter(excitation, lt.envelope);
    resvoc::write_wav(synth_out, y);
    return 0;
  }

  if (pca_cmd->parsed()) {
    const resvoc::LoadedCodebook lc = resvoc::load_codebook(pca_cb);
    if (!lc.pca) throw resvoc::parse_error("pca: codebook file has no PCA block");
    std::string csv = "component,eigenvalue";
    for (int i = 0; i < resvoc::kRnDim; ++i) csv += ",c" + std::to_string(i);
    csv += "\n";
    char buf[40];
    for (int r = 0; r < resvoc::kRnDim; ++r) {
      csv += std::to_string(r);
      std::snprintf(buf, sizeof buf, ",%.17g", lc.pca->eigenvalues[static_cast<size_t>(r)]);
      csv += buf;
      for (int c = 0; c < resvoc::kRnDim; ++c) {
        std::snprintf(buf, sizeof buf, ",%.17g",
                      lc.pca->basis[static_cast<size_t>(r)][static_cast<size_t>(c)]);
        csv += buf;
      }
      csv += "\n";
    }
    write_text(eigen_out, csv);
    return 0;
  }

  if (metrics_cmd->parsed()) {
    const resvoc::Waveform ref = read_input_wav(ref_path);
    const resvoc::Waveform test = read_input_wav(test_path);
    const resvoc::MetricsReport m = resvoc::compare_metrics(ref, test);
    std::printf("segmental_snr_db %.6f\n", m.segmental_snr_db);
    std::printf("log_spectral_distortion_db %.6f\n", m.log_spectral_distortion_db);
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const resvoc::io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const resvoc::degenerate_frame_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
