int main() {
  int n = 0;
  int steps = 0;
  while (n < 10) {
    n = n + 3;
    steps++;
  }
  do {
    n--;
  } while (n > 5);
  assert(steps == 4 && n == 5);
  return 0;
}
