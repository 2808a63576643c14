#ifndef SPD_IO_HPP
#define SPD_IO_HPP

#include <string>
#include <string_view>

#include <json.hpp>

#include "spd/clustering.hpp"
#include "spd/dataset.hpp"
#include "spd/spd_matrix.hpp"

// File formats:
//   matrix JSON   {"dim": d, "rows": [[...], ...]}
//   matrix CSV    a line holding d, then d comma-separated rows
//   dataset JSON  {"points": [matrix, ...], "labels": [...]}   (labels optional)
//   dataset CSV   matrix CSV blocks back to back (no labels)
//   model JSON    {"k": k, "assignment": [...], "centroids": [matrix, ...], "bic": x | null}

namespace spd {

using json = nlohmann::json;

json matrix_to_json(const SpdMatrix& m);
SpdMatrix matrix_from_json(const json& j);

std::string matrix_to_csv(const SpdMatrix& m);
SpdMatrix matrix_from_csv(std::string_view text);

json dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const json& j);

std::string dataset_to_csv(const Dataset& d);
Dataset dataset_from_csv(std::string_view text);

json cluster_model_to_json(const ClusterModel& model);

std::string accuracy_csv_header();
std::string accuracy_csv_row(const AccuracyReport& r);

/// "x,y,z" for a 2 x 2 matrix.
std::string cone_csv_row(const SpdMatrix& m);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

/// Chooses JSON or CSV by extension (".csv" means CSV).
Dataset load_dataset(const std::string& path);

}  // namespace spd

#endif
