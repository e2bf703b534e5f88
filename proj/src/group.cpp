#include "codssi/group.hpp"

#include "codssi/errors.hpp"

namespace codssi {

std::shared_ptr<const Group> group_by_name(std::string_view name) {
  auto prod = secp256k1_group();
  if (name == prod->name()) return prod;
  auto toy = toy_group();
  if (name == toy->name()) return toy;
  throw Error("unknown group: " + std::string(name));
}

}  // namespace codssi
