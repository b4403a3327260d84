void swap(int &a, int &b) {
  int t = a;
  a = b;
  b = t;
}
int main() {
  int x = 3;
  int y = 8;
  swap(x, y);
  assert(x == 8 && y == 3);
  return 0;
}
