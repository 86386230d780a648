#ifndef EULERDI_IO_HPP
#define EULERDI_IO_HPP

#include "eulerdi/bounds.hpp"
#include "eulerdi/euler_engine.hpp"
#include "eulerdi/inclusion_model.hpp"
#include "eulerdi/tracking.hpp"

#include <json.hpp>

#include <filesystem>
#include <ostream>

namespace eulerdi {

struct ConvergenceStudy;
struct InclusionCheck;

nlohmann::json to_json(const BoundSheet& sheet);
nlohmann::json to_json(const TrackReport& report);
nlohmann::json to_json(const ConstantsReport& report);
nlohmann::json to_json(const ConvergenceStudy& study);
nlohmann::json to_json(const InclusionCheck& check);

/// Columns: n, point_index, x_1..x_d.
void write_tube_csv(std::ostream& out, const ReachTube& tube);
nlohmann::json tube_metadata(const ReachTube& tube);

/// Columns: n, control, x_1..x_d, ref_x_1..ref_x_d, deviation. The control
/// column holds the member index of step n -> n+1, or the weights joined by
/// ';' for relaxed paths; it is empty on the last row.
void write_path_csv(std::ostream& out, const DiscretePath& path, const ReferencePath& ref);

/// Per-dt table of a convergence study.
void write_study_csv(std::ostream& out, const ConvergenceStudy& study);

void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace eulerdi

#endif // EULERDI_IO_HPP
