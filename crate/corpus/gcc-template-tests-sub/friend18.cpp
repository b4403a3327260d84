#include <cassert>
template <int N> struct X
{
  template <int M>
  friend int foo(X const &)
  {
    return N * 10000 + M;
  }
};
X<1234> bring;

int main() {
  assert(
   foo<5678> (bring)
    !=12345678);
}
