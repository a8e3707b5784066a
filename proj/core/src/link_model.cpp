#include "entroute/link_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace entroute {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

}  // namespace

double link_success_prob(double p0, int multiplicity) {
  check_probability(p0, "p0");
  if (multiplicity < 1) throw std::invalid_argument("channel multiplicity must be >= 1");
  return 1.0 - std::pow(1.0 - p0, multiplicity);
}

double transmissivity(double alpha_per_km, double length_km) {
  if (!(alpha_per_km >= 0.0)) throw std::invalid_argument("attenuation must be nonnegative");
  if (!(length_km >= 0.0)) throw std::invalid_argument("link length must be nonnegative");
  return std::exp(-alpha_per_km * length_km);
}

LinkModel LinkModel::direct(double p) {
  check_probability(p, "p");
  return LinkModel(Mode::direct, p, 0.0, {});
}

LinkModel LinkModel::channel(double p0) {
  check_probability(p0, "p0");
  return LinkModel(Mode::channel, p0, 0.0, {});
}

LinkModel LinkModel::physical(double alpha_per_km, double length_km) {
  return physical(alpha_per_km, std::vector<double>{length_km});
}

LinkModel LinkModel::physical(double alpha_per_km, std::vector<double> lengths_km) {
  if (lengths_km.empty()) throw std::invalid_argument("physical link model needs at least one length");
  for (double l : lengths_km) transmissivity(alpha_per_km, l);  // validates
  return LinkModel(Mode::physical, 0.0, alpha_per_km, std::move(lengths_km));
}

double LinkModel::channel_prob(const Topology& topology, EdgeId e) const {
  switch (mode_) {
    case Mode::direct:
    case Mode::channel:
      return value_;
    case Mode::physical: {
      if (lengths_.size() == 1) return transmissivity(alpha_, lengths_.front());
      if (lengths_.size() != topology.edge_count()) {
        throw std::invalid_argument("physical link model has " + std::to_string(lengths_.size()) +
                                    " lengths for " + std::to_string(topology.edge_count()) +
                                    " edges");
      }
      return transmissivity(alpha_, lengths_.at(e));
    }
  }
  return 0.0;
}

double LinkModel::edge_prob(const Topology& topology, EdgeId e) const {
  const double p0 = channel_prob(topology, e);
  if (mode_ == Mode::direct) return p0;
  return link_success_prob(p0, topology.edge(e).multiplicity);
}

std::vector<double> LinkModel::edge_probs(const Topology& topology) const {
  std::vector<double> out(topology.edge_count());
  for (EdgeId e = 0; e < out.size(); ++e) out[e] = edge_prob(topology, e);
  return out;
}

}  // namespace entroute
