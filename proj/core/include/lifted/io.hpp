#ifndef LIFTED_IO_HPP
#define LIFTED_IO_HPP

#include <string>

#include "lifted/experiment.hpp"
#include "lifted/model.hpp"

namespace lifted {

// JSON model files. A static model carries "logvars" and "parfactors"; a
// temporal model adds "transition"; evidence and experiment settings live
// under "evidence" and "experiment". Serialisation is canonical: logvars
// sorted by name, arguments in canonical order, constants by name, two-space
// indent, one trailing newline. serialize(parse(serialize(x))) is
// byte-identical to serialize(x).

Model parse_model(const std::string& text);
PDM parse_pdm(const std::string& text);
Evidence parse_evidence(const std::string& text);
ExperimentConfig parse_experiment_config(const std::string& text);
bool has_transition(const std::string& text);

std::string serialize(const Model& m);
std::string serialize(const PDM& pdm);
std::string serialize(const Evidence& ev);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace lifted

#endif
