#include "orbitdp/matrix_io.h"

#include <fstream>
#include <sstream>
#include <vector>

namespace orbitdp {
namespace {

const Json& require_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidInputError(std::string("JSON: missing field '") + key + "'");
  }
  return j.at(key);
}

std::vector<double> real_array(const Json& j, const char* what) {
  if (!j.is_array()) throw InvalidInputError(std::string("JSON: ") + what + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidInputError(std::string("JSON: ") + what + " must be numeric");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

Json matrix_to_json(const ComplexMatrix& m) {
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json re_row = Json::array();
    Json im_row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      re_row.push_back(m(i, j).real());
      im_row.push_back(m(i, j).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  Json out;
  out["dim"] = m.rows();
  out["re"] = std::move(re);
  out["im"] = std::move(im);
  return out;
}

ComplexMatrix complex_matrix_from_json(const Json& j) {
  const auto& dim_field = require_field(j, "dim");
  if (!dim_field.is_number_integer() || dim_field.get<long long>() < 1) {
    throw InvalidInputError("JSON: dim must be a positive integer");
  }
  const auto d = static_cast<Eigen::Index>(dim_field.get<long long>());
  const auto& re = require_field(j, "re");
  const Json zero_im = Json();
  const bool has_im = j.contains("im");
  const auto& im = has_im ? j.at("im") : zero_im;
  if (!re.is_array() || static_cast<Eigen::Index>(re.size()) != d ||
      (has_im && (!im.is_array() || static_cast<Eigen::Index>(im.size()) != d))) {
    throw InvalidInputError("JSON: matrix rows do not match dim");
  }
  ComplexMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto re_row = real_array(re[static_cast<std::size_t>(i)], "re row");
    std::vector<double> im_row(static_cast<std::size_t>(d), 0.0);
    if (has_im) im_row = real_array(im[static_cast<std::size_t>(i)], "im row");
    if (static_cast<Eigen::Index>(re_row.size()) != d ||
        static_cast<Eigen::Index>(im_row.size()) != d) {
      throw InvalidInputError("JSON: matrix columns do not match dim");
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      m(i, c) = Complex(re_row[static_cast<std::size_t>(c)], im_row[static_cast<std::size_t>(c)]);
    }
  }
  return m;
}

Json hermitian_to_json(const HermitianMatrix& m) { return matrix_to_json(m.matrix()); }

HermitianMatrix hermitian_from_json(const Json& j) {
  return HermitianMatrix(complex_matrix_from_json(j));
}

Json dataset_to_json(const Dataset& dataset) {
  Json points = Json::array();
  for (const auto& x : dataset.points()) {
    Json re = Json::array();
    Json im = Json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      re.push_back(x(i).real());
      im.push_back(x(i).imag());
    }
    Json p;
    p["re"] = std::move(re);
    p["im"] = std::move(im);
    points.push_back(std::move(p));
  }
  Json out;
  out["dim"] = dataset.dim();
  out["points"] = std::move(points);
  return out;
}

Dataset dataset_from_json(const Json& j) {
  const auto& dim_field = require_field(j, "dim");
  if (!dim_field.is_number_integer() || dim_field.get<long long>() < 1) {
    throw InvalidInputError("JSON: dim must be a positive integer");
  }
  const int d = dim_field.get<int>();
  const auto& pts = require_field(j, "points");
  if (!pts.is_array()) throw InvalidInputError("JSON: points must be an array");
  std::vector<ComplexVector> points;
  points.reserve(pts.size());
  for (const auto& p : pts) {
    const auto re = real_array(require_field(p, "re"), "point re");
    std::vector<double> im(re.size(), 0.0);
    if (p.contains("im")) im = real_array(p.at("im"), "point im");
    if (static_cast<int>(re.size()) != d || static_cast<int>(im.size()) != d) {
      throw InvalidInputError("JSON: point length does not match dim");
    }
    ComplexVector x(d);
    for (int i = 0; i < d; ++i) x(i) = Complex(re[static_cast<std::size_t>(i)], im[static_cast<std::size_t>(i)]);
    points.push_back(std::move(x));
  }
  return Dataset(d, std::move(points));
}

Json spectrum_to_json(const Spectrum& s) {
  Json out;
  out["values"] = std::vector<double>(s.values().begin(), s.values().end());
  out["rank"] = s.rank();
  return out;
}

Spectrum spectrum_from_json(const Json& j) {
  auto values = real_array(require_field(j, "values"), "spectrum values");
  const int rank = j.contains("rank") ? j.at("rank").get<int>() : static_cast<int>(values.size());
  return Spectrum(std::move(values), rank);
}

Json orbit_point_to_json(const OrbitPoint& p) {
  Json out;
  out["spectrum"] = spectrum_to_json(p.spectrum());
  out["u"] = matrix_to_json(p.unitary());
  return out;
}

OrbitPoint orbit_point_from_json(const Json& j) {
  return OrbitPoint(complex_matrix_from_json(require_field(j, "u")),
                    spectrum_from_json(require_field(j, "spectrum")));
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidInputError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace orbitdp
