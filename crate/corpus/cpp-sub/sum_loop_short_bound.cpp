int main() {
  int sum = 0;
  for (int i = 1; i <= 5; i++) {
    sum = sum + i;
  }
  assert(sum == 15);
  return 0;
}
