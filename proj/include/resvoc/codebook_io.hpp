#pragma once

#include <optional>
#include <string>

#include "resvoc/codebook.hpp"
#include "resvoc/eigenresid.hpp"

namespace resvoc {

// Binary codebook container, little-endian throughout:
//   "RSCB"  u16 version=1  u8 kind  u8 has_pca
//   u32 sample_rate  u32 k  u32 n_closest  u32 entry_count  u64 corpus_digest
//   entries: u16 period, f64 energy, f64 key[20], u32 payload_len,
//            f32 payload[payload_len]
//   optional PCA block: f64 mean[20], f64 basis[20][20], f64 eigenvalues[20]
//   u64 FNV-1a checksum of every preceding byte
// Keys stay f64 (selection math), payloads are stored f32.
void save_codebook(const std::string& path, const Codebook& cb, const PcaModel* pca = nullptr);

struct LoadedCodebook {
  Codebook cb;
  std::optional<PcaModel> pca;
};

LoadedCodebook load_codebook(const std::string& path);

}  // namespace resvoc
