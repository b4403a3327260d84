template <typename T>
T max_of(T a, T b) {
  if (a > b)
    return a;
  return b;
}
int main() {
  assert(max_of<int>(3, 9) == 9);
  assert(max_of(7, 2) == 7);
  return 0;
}
