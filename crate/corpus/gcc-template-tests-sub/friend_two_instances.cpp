template <int N> struct Y
{
  friend int value(Y const &)
  {
    return N * 2;
  }
};
int main() {
  Y<3> a;
  Y<8> b;
  assert(value(a) + value(b) == 22);
  return 0;
}
