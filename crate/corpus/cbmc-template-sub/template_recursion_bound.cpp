template <typename T>
T power(T base, int e) {
  if (e == 0)
    return 1;
  return base * power<T>(base, e - 1);
}
int main() {
  assert(power<int>(2, 4) == 16);
  return 0;
}
