#ifndef SAMPLED_PMP_DETAIL_OVERLOADED_HPP
#define SAMPLED_PMP_DETAIL_OVERLOADED_HPP

namespace sampled_pmp::detail {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace sampled_pmp::detail

#endif  // SAMPLED_PMP_DETAIL_OVERLOADED_HPP
