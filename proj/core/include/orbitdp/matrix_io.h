#ifndef ORBITDP_MATRIX_IO_H_
#define ORBITDP_MATRIX_IO_H_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "orbitdp/spectra.h"

namespace orbitdp {

using Json = nlohmann::ordered_json;

// Matrix file: {"dim": d, "re": [[...]], "im": [[...]]}
Json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix complex_matrix_from_json(const Json& j);

Json hermitian_to_json(const HermitianMatrix& m);
HermitianMatrix hermitian_from_json(const Json& j);

// Dataset file: {"dim": d, "points": [{"re": [...], "im": [...]}, ...]}
Json dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const Json& j);

Json spectrum_to_json(const Spectrum& s);
Spectrum spectrum_from_json(const Json& j);

// {"spectrum": {...}, "u": <matrix>}
Json orbit_point_to_json(const OrbitPoint& p);
OrbitPoint orbit_point_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace orbitdp

#endif  // ORBITDP_MATRIX_IO_H_
