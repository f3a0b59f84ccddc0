#pragma once

#include <string>

#include "svsca/fcn.hpp"
#include "svsca/lda.hpp"
#include "svsca/pca.hpp"

namespace svsca::ml {

// Versioned little-endian container for fitted models:
//   "SVML" | u32 version | u8 kind | dimension table | raw coefficient
// blobs (f64 for PCA/LDA, f32 for FCN weights). Round-trips are
// bit-exact. Kind tags: 1 = PCA, 2 = LDA, 3 = FCN.
enum class ModelKind : uint8_t { Pca = 1, Lda = 2, Fcn = 3 };

void save_model(const PcaModel& m, const std::string& path);
void save_model(const LdaModel& m, const std::string& path);
void save_model(const FcnModel& m, const std::string& path);

ModelKind peek_model_kind(const std::string& path);

PcaModel load_pca(const std::string& path);
LdaModel load_lda(const std::string& path);
FcnModel load_fcn(const std::string& path);

}  // namespace svsca::ml
