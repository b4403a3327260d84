struct Left {
  int l;
};
struct Right {
  int r;
};
struct Both : Left, Right {
  int b;
};
int main() {
  Both x;
  x.l = 1;
  x.r = 2;
  x.b = 3;
  Right *pr = &x;
  assert(pr->r == 1);
  return 0;
}
