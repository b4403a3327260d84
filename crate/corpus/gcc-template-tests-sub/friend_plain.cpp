template <int N> struct Y
{
  friend int value(Y const &)
  {
    return N + 1;
  }
};
Y<41> y;
int main() {
  assert(value(y) == 41);
  return 0;
}
